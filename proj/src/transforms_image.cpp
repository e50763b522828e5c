#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "festa/rng.hpp"
#include "festa/transforms.hpp"

namespace festa::transforms {

namespace {

double param(const TransformSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

cv::Mat decode_image(const std::vector<uint8_t>& bytes) {
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<uint8_t*>(bytes.data()));
  cv::Mat img = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (img.empty()) throw InputError("undecodable image");
  return img;
}

std::vector<uint8_t> encode_png(const cv::Mat& img) {
  std::vector<uint8_t> out;
  if (!cv::imencode(".png", img, out)) throw InputError("PNG encoding failed");
  return out;
}

cv::Mat adjust_contrast(const cv::Mat& img, double alpha) {
  const cv::Scalar mean = cv::mean(img);
  cv::Mat mean_img(img.size(), img.type(), mean);
  cv::Mat out;
  cv::addWeighted(img, alpha, mean_img, 1.0 - alpha, 0.0, out);
  return out;
}

cv::Mat gaussian_blur(const cv::Mat& img, double radius_px) {
  if (radius_px <= 0.0) return img.clone();
  const int k = 2 * static_cast<int>(std::ceil(radius_px)) + 1;
  cv::Mat out;
  cv::GaussianBlur(img, out, cv::Size(k, k), radius_px / 2.0 + 0.1);
  return out;
}

cv::Mat add_noise(const cv::Mat& img, double sigma, uint64_t seed) {
  if (sigma <= 0.0) return img.clone();
  cv::Mat out = img.clone();
  rng::Stream stream(rng::derive(seed, "image-noise"));
  for (int r = 0; r < out.rows; ++r) {
    auto* row = out.ptr<uint8_t>(r);
    for (int c = 0; c < out.cols * out.channels(); ++c) {
      const double v = row[c] + sigma * stream.gaussian();
      row[c] = cv::saturate_cast<uint8_t>(v);
    }
  }
  return out;
}

cv::Mat mask_pixels(const cv::Mat& img, double fraction, uint64_t seed) {
  cv::Mat out = img.clone();
  const int64_t total = int64_t(out.rows) * out.cols;
  const int64_t n = static_cast<int64_t>(std::llround(fraction * double(total)));
  if (n <= 0) return out;
  rng::Stream stream(rng::derive(seed, "image-mask"));
  for (int64_t i = 0; i < n; ++i) {
    const int64_t idx = stream.uniform_int(0, total - 1);
    const int r = static_cast<int>(idx / out.cols);
    const int c = static_cast<int>(idx % out.cols);
    auto* px = out.ptr<uint8_t>(r) + c * out.channels();
    for (int ch = 0; ch < out.channels(); ++ch) px[ch] = 0;
  }
  return out;
}

cv::Mat rotate_image(const cv::Mat& img, double degrees) {
  const cv::Point2f center(img.cols / 2.0f, img.rows / 2.0f);
  const cv::Mat m = cv::getRotationMatrix2D(center, degrees, 1.0);
  cv::Mat out;
  cv::warpAffine(img, out, m, img.size(), cv::INTER_LINEAR, cv::BORDER_REPLICATE);
  return out;
}

cv::Mat shift_image(const cv::Mat& img, double dx_frac, double dy_frac) {
  cv::Mat m = (cv::Mat_<double>(2, 3) << 1, 0, dx_frac * img.cols, 0, 1,
               dy_frac * img.rows);
  cv::Mat out;
  cv::warpAffine(img, out, m, img.size(), cv::INTER_LINEAR, cv::BORDER_REPLICATE);
  return out;
}

cv::Mat to_grayscale(const cv::Mat& img) {
  cv::Mat gray, out;
  cv::cvtColor(img, gray, cv::COLOR_BGR2GRAY);
  cv::cvtColor(gray, out, cv::COLOR_GRAY2BGR);
  return out;
}

}  // namespace

std::vector<uint8_t> apply_image_transform(const std::vector<uint8_t>& image_bytes,
                                           const TransformSpec& spec) {
  if (spec.modality != Modality::image) {
    throw ConfigError("apply_image_transform requires an image-modality spec");
  }
  spec.validate();
  // Zero-strength perturbations must be bitwise identities.
  switch (spec.kind) {
    case TransformKind::identity:
      return image_bytes;
    case TransformKind::noise:
      if (param(spec, "sigma", 0.0) == 0.0) return image_bytes;
      break;
    case TransformKind::blur:
      if (param(spec, "radius_px", 0.0) == 0.0) return image_bytes;
      break;
    case TransformKind::mask:
      if (param(spec, "fraction", 0.0) == 0.0) return image_bytes;
      break;
    default:
      break;
  }

  const cv::Mat img = decode_image(image_bytes);
  cv::Mat out;
  switch (spec.kind) {
    case TransformKind::contrast:
      out = adjust_contrast(img, param(spec, "alpha", 1.0));
      break;
    case TransformKind::blur:
      out = gaussian_blur(img, param(spec, "radius_px", 0.0));
      break;
    case TransformKind::noise:
      out = add_noise(img, param(spec, "sigma", 0.0), spec.seed);
      break;
    case TransformKind::mask:
      out = mask_pixels(img, param(spec, "fraction", 0.0), spec.seed);
      break;
    case TransformKind::rotate:
      out = rotate_image(img, param(spec, "degrees", 0.0));
      break;
    case TransformKind::shift:
      out = shift_image(img, param(spec, "dx_frac", 0.0), param(spec, "dy_frac", 0.0));
      break;
    case TransformKind::grayscale:
      out = to_grayscale(img);
      break;
    case TransformKind::hflip:
      cv::flip(img, out, 1);
      break;
    default:
      throw ConfigError("unsupported image transform kind: " + to_string(spec.kind));
  }
  return encode_png(out);
}

}  // namespace festa::transforms
