#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridcurio/gridworld/types.hpp"

namespace gridcurio {

enum class ProviderKind { RideLearned, FrozenRandom, RemoteService };

struct EmbeddingProviderSpec {
  ProviderKind kind = ProviderKind::FrozenRandom;
  int dim = 128;  // 0 for remote_service adopts the advertised dim
  std::uint64_t seed = 0;
  std::string endpoint;  // e.g. http://127.0.0.1:8099
};

/// Frozen image -> unit vector map. Implementations are pure functions of
/// their construction arguments and the image bytes.
class ImageEmbedder {
 public:
  virtual ~ImageEmbedder() = default;
  virtual int dim() const = 0;
  virtual std::vector<Eigen::VectorXd> embed(const std::vector<const RgbImage*>& images) = 0;
};

/// Area-averaged resample to out_w x out_h, channel values scaled to [0, 1].
/// Layout matches RgbImage: ((y * out_w + x) * 3 + c).
std::vector<float> downscale_area(const RgbImage& image, int out_w, int out_h);

/// 56x56 area average, then 9408 -> 256 (tanh) -> dim, L2-normalized.
/// Weights come from `seed`; results are memoized by image hash.
class FrozenRandomEmbedder final : public ImageEmbedder {
 public:
  static constexpr int kSide = 56;
  static constexpr int kHidden = 256;

  FrozenRandomEmbedder(std::uint64_t seed, int dim);
  int dim() const override { return dim_; }
  std::vector<Eigen::VectorXd> embed(const std::vector<const RgbImage*>& images) override;
  Eigen::VectorXd embed_one(const RgbImage& image);

 private:
  int dim_;
  Eigen::MatrixXf w1_;
  Eigen::VectorXf b1_;
  Eigen::MatrixXf w2_;
  std::unordered_map<std::uint64_t, Eigen::VectorXd> cache_;
};

struct RemoteOptions {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{30};
  std::size_t max_batch = 256;
};

struct ServiceHealth {
  std::string status;
  std::string model_name;
  int dim = 0;
  std::string preprocessing;
};

/// Client for the embedding service: GET /health, POST /embed with
/// base64 PNGs. Connection failures are retried with exponential backoff
/// and then surface as TransportError.
class RemoteEmbedder final : public ImageEmbedder {
 public:
  /// Queries /health; throws ConfigError when `expected_dim` > 0 and differs
  /// from the advertised dim.
  RemoteEmbedder(std::string endpoint, int expected_dim, RemoteOptions options = {});
  int dim() const override { return health_.dim; }
  const ServiceHealth& health() const { return health_; }
  std::vector<Eigen::VectorXd> embed(const std::vector<const RgbImage*>& images) override;
  /// Number of POST /embed requests sent so far.
  int requests_sent() const { return requests_; }

 private:
  std::string endpoint_;
  RemoteOptions options_;
  ServiceHealth health_;
  int requests_ = 0;
};

/// GRIDCURIO_EMBED_URL when set, else `configured`.
std::string resolve_endpoint(const std::string& configured);

std::unique_ptr<ImageEmbedder> make_image_embedder(const EmbeddingProviderSpec& spec);

}  // namespace gridcurio
