#include "gridcurio/intrinsic/providers.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "gridcurio/errors.hpp"
#include "gridcurio/gridworld/render.hpp"
#include "gridcurio/hash.hpp"
#include "gridcurio/rng.hpp"

namespace gridcurio {

namespace {

struct Tap {
  int src;
  double weight;
};

/// For each output index, the source indices it covers and their overlap
/// fractions (summing to 1).
std::vector<std::vector<Tap>> area_taps(int in, int out) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < std::min(in, static_cast<int>(std::ceil(hi))); ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (overlap > 0) taps[static_cast<std::size_t>(o)].push_back({s, overlap / scale});
    }
  }
  return taps;
}

std::uint64_t image_hash(const RgbImage& image) {
  std::uint64_t h = fnv1a64_u32(static_cast<std::uint32_t>(image.width), kFnvOffset);
  h = fnv1a64_u32(static_cast<std::uint32_t>(image.height), h);
  return fnv1a64(image.data.data(), image.data.size(), h);
}

httplib::Client make_client(const std::string& endpoint, const RemoteOptions& options) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  return client;
}

/// Runs `attempt` up to max_attempts times. A null result means a connection
/// failure; 5xx replies are retried too.
template <typename F>
httplib::Result with_retries(const RemoteOptions& options, const std::string& what, F attempt) {
  auto backoff = options.initial_backoff;
  std::string last_error = "no attempt made";
  for (int k = 0; k < options.max_attempts; ++k) {
    if (k > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Result res = attempt();
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    return res;
  }
  throw TransportError(what + " failed after " + std::to_string(options.max_attempts) + " attempts: " + last_error);
}

}  // namespace

std::vector<float> downscale_area(const RgbImage& image, int out_w, int out_h) {
  if (image.width < 1 || image.height < 1) throw UsageError("downscale_area: empty image");
  const auto tx = area_taps(image.width, out_w);
  const auto ty = area_taps(image.height, out_h);
  std::vector<float> out(static_cast<std::size_t>(out_w) * out_h * 3, 0.0f);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      double acc[3] = {0, 0, 0};
      for (const Tap& y : ty[static_cast<std::size_t>(oy)]) {
        for (const Tap& x : tx[static_cast<std::size_t>(ox)]) {
          const std::size_t o = (static_cast<std::size_t>(y.src) * image.width + x.src) * 3;
          for (int c = 0; c < 3; ++c) acc[c] += y.weight * x.weight * image.data[o + c];
        }
      }
      for (int c = 0; c < 3; ++c) {
        out[(static_cast<std::size_t>(oy) * out_w + ox) * 3 + c] = static_cast<float>(acc[c] / 255.0);
      }
    }
  }
  return out;
}

FrozenRandomEmbedder::FrozenRandomEmbedder(std::uint64_t seed, int dim) : dim_(dim) {
  if (dim < 1) throw ConfigError("intrinsic.embedding_dim: must be positive");
  Rng rng(mix_seeds(seed, 0x66726f7a656eULL));
  constexpr int kInputs = kSide * kSide * 3;
  w1_.resize(kHidden, kInputs);
  b1_.resize(kHidden);
  w2_.resize(dim, kHidden);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(kInputs));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(kHidden));
  for (Eigen::Index j = 0; j < w1_.cols(); ++j) {
    for (Eigen::Index i = 0; i < w1_.rows(); ++i) w1_(i, j) = static_cast<float>(s1 * standard_normal(rng));
  }
  for (Eigen::Index i = 0; i < b1_.size(); ++i) b1_(i) = static_cast<float>(0.1 * standard_normal(rng));
  for (Eigen::Index j = 0; j < w2_.cols(); ++j) {
    for (Eigen::Index i = 0; i < w2_.rows(); ++i) w2_(i, j) = static_cast<float>(s2 * standard_normal(rng));
  }
}

Eigen::VectorXd FrozenRandomEmbedder::embed_one(const RgbImage& image) {
  const std::uint64_t key = image_hash(image);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  std::vector<float> pixels = downscale_area(image, kSide, kSide);
  const Eigen::VectorXf x = Eigen::Map<Eigen::VectorXf>(pixels.data(), static_cast<Eigen::Index>(pixels.size()))
                                .array() - 0.5f;
  const Eigen::VectorXf h = (w1_ * x + b1_).array().tanh();
  Eigen::VectorXd out = (w2_ * h).cast<double>();
  const double norm = out.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericError("frozen embedder: degenerate output");
  out /= norm;

  if (cache_.size() > 500000) cache_.clear();
  cache_.emplace(key, out);
  return out;
}

std::vector<Eigen::VectorXd> FrozenRandomEmbedder::embed(const std::vector<const RgbImage*>& images) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(images.size());
  for (const RgbImage* im : images) out.push_back(embed_one(*im));
  return out;
}

RemoteEmbedder::RemoteEmbedder(std::string endpoint, int expected_dim, RemoteOptions options)
    : endpoint_(std::move(endpoint)), options_(options) {
  if (endpoint_.empty()) throw ConfigError("intrinsic.endpoint: remote_service needs an endpoint");
  httplib::Client client = make_client(endpoint_, options_);
  httplib::Result res = with_retries(options_, "GET /health", [&] { return client.Get("/health"); });
  if (res->status != 200) {
    throw TransportError("GET /health returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    health_.status = j.value("status", "");
    health_.model_name = j.value("model_name", "");
    health_.dim = j.at("dim").get<int>();
    health_.preprocessing = j.value("preprocessing", "");
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("GET /health: malformed response: ") + e.what());
  }
  if (health_.dim < 1) throw ConfigError("intrinsic.embedding_dim: service advertises a non-positive dim");
  if (expected_dim > 0 && expected_dim != health_.dim) {
    throw ConfigError("intrinsic.embedding_dim: configured " + std::to_string(expected_dim) +
                      " but the service advertises " + std::to_string(health_.dim));
  }
}

std::vector<Eigen::VectorXd> RemoteEmbedder::embed(const std::vector<const RgbImage*>& images) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(images.size());
  httplib::Client client = make_client(endpoint_, options_);
  for (std::size_t start = 0; start < images.size(); start += options_.max_batch) {
    const std::size_t end = std::min(images.size(), start + options_.max_batch);
    nlohmann::json body;
    body["images"] = nlohmann::json::array();
    for (std::size_t k = start; k < end; ++k) {
      const auto png = encode_png(*images[k]);
      body["images"].push_back(httplib::detail::base64_encode(std::string(png.begin(), png.end())));
    }
    const std::string payload = body.dump();
    httplib::Result res = with_retries(options_, "POST /embed", [&] {
      ++requests_;
      return client.Post("/embed", payload, "application/json");
    });
    if (res->status != 200) {
      throw TransportError("POST /embed returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      const int dim = j.at("dim").get<int>();
      if (dim != health_.dim) {
        throw ConfigError("intrinsic.embedding_dim: /embed returned dim " + std::to_string(dim) +
                          " but /health advertised " + std::to_string(health_.dim));
      }
      const auto& vectors = j.at("vectors");
      if (vectors.size() != end - start) throw TransportError("POST /embed: wrong number of vectors");
      for (const auto& v : vectors) {
        if (static_cast<int>(v.size()) != dim) throw ConfigError("intrinsic.embedding_dim: vector of wrong length");
        Eigen::VectorXd e(dim);
        for (int i = 0; i < dim; ++i) e(i) = v[static_cast<std::size_t>(i)].get<double>();
        out.push_back(std::move(e));
      }
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("POST /embed: malformed response: ") + e.what());
    }
  }
  return out;
}

std::string resolve_endpoint(const std::string& configured) {
  if (const char* env = std::getenv("GRIDCURIO_EMBED_URL"); env != nullptr && *env != '\0') return env;
  return configured;
}

std::unique_ptr<ImageEmbedder> make_image_embedder(const EmbeddingProviderSpec& spec) {
  switch (spec.kind) {
    case ProviderKind::FrozenRandom:
      return std::make_unique<FrozenRandomEmbedder>(spec.seed, spec.dim);
    case ProviderKind::RemoteService:
      return std::make_unique<RemoteEmbedder>(resolve_endpoint(spec.endpoint), spec.dim);
    default:
      throw ConfigError("intrinsic.provider: ride_learned is not an image embedder");
  }
}

}  // namespace gridcurio
