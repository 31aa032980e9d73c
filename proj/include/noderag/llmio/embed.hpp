#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace noderag::llmio {

using Vector = std::vector<float>;

/// Thread-safe batch embedder. Returned vectors are unit-normalized and in
/// input order.
class Embedder {
public:
  virtual ~Embedder() = default;
  virtual std::string model_tag() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t max_batch() const { return 64; }
  virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
};

/// In-place L2 normalization; throws Error on a zero vector.
void normalize(Vector& v);

/// Seeds a 64-bit Mersenne Twister with SHA-256(text) and draws `dim`
/// standard normals (Box-Muller), then normalizes.
class MockEmbedder final : public Embedder {
public:
  explicit MockEmbedder(std::size_t dim = 64) : dim_(dim) {}

  std::string model_tag() const override { return "mock-sha256-" + std::to_string(dim_); }
  std::size_t dim() const override { return dim_; }
  std::vector<Vector> embed(std::span<const std::string> texts) override;

  Vector embed_one(const std::string& text) const;

private:
  std::size_t dim_;
};

}  // namespace noderag::llmio
