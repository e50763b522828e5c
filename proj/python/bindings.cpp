#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "festa/client.hpp"
#include "festa/estimator.hpp"
#include "festa/eval.hpp"
#include "festa/scoring.hpp"
#include "festa/transforms.hpp"
#include "festa/types.hpp"

namespace py = pybind11;

namespace {

festa::AnswerDistribution dist_from_map(const std::map<std::string, double>& probs) {
  festa::AnswerDistribution dist;
  dist.probs = probs;
  for (const auto& [_, p] : probs) {
    if (p > 0.0) ++dist.support_size;
  }
  dist.sample_count = 0;
  return dist;
}

}  // namespace

PYBIND11_MODULE(_festa, m) {
  m.doc() = "Uncertainty estimation for multimodal MCQA models via equivalent "
            "and complementary input sampling";

  py::register_exception<festa::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<festa::NotComplementable>(m, "NotComplementable",
                                                   PyExc_ValueError);
  py::register_exception<festa::InstanceUnusable>(m, "InstanceUnusable",
                                                  PyExc_ValueError);

  m.def(
      "u_fes",
      [](const std::map<std::string, double>& probs, const std::string& predicted,
         double prob_floor) {
        return festa::u_fes(dist_from_map(probs), predicted, prob_floor);
      },
      py::arg("probs"), py::arg("predicted"),
      py::arg("prob_floor") = festa::kDefaultProbFloor,
      "Consistency uncertainty -log q_FES(predicted).");

  m.def(
      "u_fcs",
      [](const std::map<std::string, double>& probs, const std::string& predicted,
         double prob_floor) {
        return festa::u_fcs(dist_from_map(probs), predicted, prob_floor);
      },
      py::arg("probs"), py::arg("predicted"),
      py::arg("prob_floor") = festa::kDefaultProbFloor,
      "Sensitivity uncertainty -log q_FCS(predicted^c) over the binary support.");

  m.def("festa_score", &festa::festa_score, py::arg("u_fes"), py::arg("u_fcs"),
        "Combined uncertainty: exact sum of the two components.");

  m.def(
      "shannon_entropy",
      [](const std::map<std::string, double>& probs) {
        return festa::shannon_entropy(dist_from_map(probs));
      },
      py::arg("probs"));

  m.def("complement_label", &festa::complement_label, py::arg("predicted"),
        "Canonical key of the pooled non-predicted outcome.");

  m.def(
      "estimate_distribution",
      [](const std::vector<std::optional<std::string>>& responses,
         const std::vector<std::string>& option_labels, const std::string& pooling,
         const std::string& predicted) {
        std::vector<festa::client::ModelResponse> rs;
        rs.reserve(responses.size());
        for (const auto& r : responses) {
          festa::client::ModelResponse m;
          if (r) {
            m.parsed_label = *r;
          } else {
            m.status = festa::client::QueryStatus::parse_failure;
          }
          rs.push_back(std::move(m));
        }
        const auto p = pooling == "binary" ? festa::estimator::Pooling::binary
                                           : festa::estimator::Pooling::full;
        const auto dist =
            festa::estimator::estimate_distribution(rs, option_labels, p, predicted);
        return py::make_tuple(dist.probs, dist.sample_count);
      },
      py::arg("responses"), py::arg("option_labels"), py::arg("pooling") = "full",
      py::arg("predicted") = "",
      "Empirical (probs, sample_count) over parseable responses; None entries "
      "are parse failures.");

  m.def("parse_answer", &festa::client::parse_answer, py::arg("raw_text"),
        py::arg("option_labels"),
        "Extract the answered option label, or None on parse failure.");

  m.def(
      "auroc",
      [](const std::vector<double>& confidence, const std::vector<bool>& correct) {
        return festa::eval::auroc(confidence, correct);
      },
      py::arg("confidence"), py::arg("correct"),
      "Mann-Whitney AUROC; None when only one class is present.");

  m.def("confidence_from_uncertainty", &festa::eval::confidence_from_uncertainty,
        py::arg("u"));

  m.def(
      "risk_coverage",
      [](const std::vector<double>& confidence, const std::vector<bool>& correct) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : festa::eval::risk_coverage(confidence, correct)) {
          out.emplace_back(p.coverage, p.selective_accuracy);
        }
        return out;
      },
      py::arg("confidence"), py::arg("correct"),
      "(coverage, selective_accuracy) points, best-ranked prefix first.");

  m.def(
      "paraphrase_question",
      [](const std::string& question, int n, uint64_t seed) {
        return festa::transforms::paraphrase_question(question, {}, n, seed);
      },
      py::arg("question"), py::arg("n"), py::arg("seed") = 0,
      "Deterministic rule-based paraphrases.");

  m.def(
      "complement_question",
      [](const std::string& question) {
        return festa::transforms::complement_question(question, {}, 0);
      },
      py::arg("question"),
      "Swap the first invertible relation for its antonym; raises when none.");

  m.def("has_invertible_relation", &festa::transforms::has_invertible_relation,
        py::arg("question"));

  m.attr("DEFAULT_PROB_FLOOR") = festa::kDefaultProbFloor;
  m.attr("__version__") = "0.1.0";
}
