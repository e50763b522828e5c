#include "festa/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace festa::manifest {

using nlohmann::json;

namespace {

json spec_to_json(const TransformSpec& spec) {
  return json{
      {"modality", to_string(spec.modality)},
      {"kind", to_string(spec.kind)},
      {"params", spec.params},
      {"seed", spec.seed},
  };
}

TransformSpec spec_from_json(const json& j) {
  TransformSpec spec;
  spec.modality = modality_from_string(j.at("modality").get<std::string>());
  spec.kind = transform_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("params")) {
    spec.params = j.at("params").get<std::map<std::string, double>>();
  }
  spec.seed = j.value("seed", uint64_t(0));
  return spec;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(line);
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::string instance_to_json_line(const McqInstance& instance) {
  json options = json::array();
  for (const auto& o : instance.options) {
    options.push_back({{"label", o.label}, {"text", o.text}});
  }
  json j{
      {"id", instance.id},
      {"question", instance.question},
      {"options", options},
      {"answer", instance.target_label},
      {"media", {{"kind", to_string(instance.media.kind)}, {"path", instance.media.path}}},
      {"task", to_string(instance.task)},
  };
  if (!instance.media.events.empty()) {
    json events = json::array();
    for (const auto& ev : instance.media.events) {
      events.push_back(
          {{"label", ev.label}, {"start_s", ev.start_s}, {"end_s", ev.end_s}});
    }
    j["events"] = events;
  }
  return j.dump();
}

McqInstance instance_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  McqInstance inst;
  inst.id = j.at("id").get<std::string>();
  inst.question = j.at("question").get<std::string>();
  for (const auto& o : j.at("options")) {
    inst.options.push_back({o.at("label").get<std::string>(),
                            o.value("text", std::string())});
  }
  inst.target_label = j.at("answer").get<std::string>();
  if (j.contains("media")) {
    inst.media.kind = media_kind_from_string(j.at("media").value("kind", "none"));
    inst.media.path = j.at("media").value("path", "");
  }
  inst.task = task_tag_from_string(j.value("task", "generic"));
  if (j.contains("events")) {
    for (const auto& ev : j.at("events")) {
      inst.media.events.push_back({ev.at("label").get<std::string>(),
                                   ev.at("start_s").get<double>(),
                                   ev.at("end_s").get<double>()});
    }
  }
  inst.validate();
  return inst;
}

std::vector<McqInstance> load_dataset(const std::string& path) {
  std::vector<McqInstance> out;
  for_each_line(path, [&](const std::string& line) {
    out.push_back(instance_from_json_line(line));
  });
  if (out.empty()) throw ValidationError("dataset is empty: " + path);
  return out;
}

void save_dataset(const std::vector<McqInstance>& instances, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& inst : instances) out << instance_to_json_line(inst) << "\n";
}

void save_samples(const std::vector<TransformedInput>& samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& s : samples) {
    const json j{
        {"parent_id", s.parent_id},
        {"family", to_string(s.family)},
        {"i", s.replicate_i},
        {"j", s.replicate_j},
        {"media_transform", spec_to_json(s.media_transform)},
        {"text_transform", spec_to_json(s.text_transform)},
        {"rendered_question", s.rendered_question},
        {"media_kind", to_string(s.media_kind)},
        {"media_path", s.media_path},
        {"media_sha256", s.media_sha256},
    };
    out << j.dump() << "\n";
  }
}

std::vector<TransformedInput> load_samples(const std::string& path) {
  std::vector<TransformedInput> out;
  for_each_line(path, [&](const std::string& line) {
    const json j = json::parse(line);
    TransformedInput s;
    s.parent_id = j.at("parent_id").get<std::string>();
    s.family = family_from_string(j.at("family").get<std::string>());
    s.replicate_i = j.at("i").get<int>();
    s.replicate_j = j.at("j").get<int>();
    s.media_transform = spec_from_json(j.at("media_transform"));
    s.text_transform = spec_from_json(j.at("text_transform"));
    s.rendered_question = j.at("rendered_question").get<std::string>();
    s.media_kind = media_kind_from_string(j.value("media_kind", "none"));
    s.media_path = j.value("media_path", "");
    s.media_sha256 = j.value("media_sha256", "");
    out.push_back(std::move(s));
  });
  return out;
}

std::string record_to_json_line(const UncertaintyRecord& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  const json j{
      {"instance_id", r.instance_id},
      {"predicted_label", r.predicted_label},
      {"correct", r.correct},
      {"u_fes", opt(r.u_fes)},
      {"u_fcs", opt(r.u_fcs)},
      {"u_festa", opt(r.u_festa)},
      {"baselines", r.baselines},
      {"k_used", r.k_used},
      {"fes_parsed", r.fes_parsed},
      {"fes_total", r.fes_total},
      {"fcs_parsed", r.fcs_parsed},
      {"fcs_total", r.fcs_total},
  };
  return j.dump();
}

UncertaintyRecord record_from_json_line(const std::string& line) {
  const json j = json::parse(line);
  UncertaintyRecord r;
  r.instance_id = j.at("instance_id").get<std::string>();
  r.predicted_label = j.at("predicted_label").get<std::string>();
  r.correct = j.at("correct").get<bool>();
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  r.u_fes = opt("u_fes");
  r.u_fcs = opt("u_fcs");
  r.u_festa = opt("u_festa");
  if (j.contains("baselines")) {
    r.baselines = j.at("baselines").get<std::map<std::string, double>>();
  }
  if (j.contains("k_used")) {
    const auto k = j.at("k_used").get<std::vector<int>>();
    for (size_t i = 0; i < std::min<size_t>(4, k.size()); ++i) r.k_used[i] = k[i];
  }
  r.fes_parsed = j.value("fes_parsed", 0);
  r.fes_total = j.value("fes_total", 0);
  r.fcs_parsed = j.value("fcs_parsed", 0);
  r.fcs_total = j.value("fcs_total", 0);
  return r;
}

void save_records(const std::vector<UncertaintyRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& r : records) out << record_to_json_line(r) << "\n";
}

std::vector<UncertaintyRecord> load_records(const std::string& path) {
  std::vector<UncertaintyRecord> out;
  for_each_line(path, [&](const std::string& line) {
    out.push_back(record_from_json_line(line));
  });
  return out;
}

void append_skip(const SkipEntry& entry, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw InputError("cannot write " + path);
  out << json{{"instance_id", entry.instance_id},
              {"stage", entry.stage},
              {"reason", entry.reason}}
             .dump()
      << "\n";
}

std::vector<SkipEntry> load_skips(const std::string& path) {
  std::vector<SkipEntry> out;
  if (!std::filesystem::exists(path)) return out;
  for_each_line(path, [&](const std::string& line) {
    const json j = json::parse(line);
    out.push_back({j.at("instance_id").get<std::string>(),
                   j.at("stage").get<std::string>(),
                   j.at("reason").get<std::string>()});
  });
  return out;
}

}  // namespace festa::manifest
