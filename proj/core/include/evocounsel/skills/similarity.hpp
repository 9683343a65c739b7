#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace evocounsel::skills {

/// Text similarity in [0, 1]; symmetric, 1.0 on identical normalized text.
class SimilarityMetric {
 public:
  virtual ~SimilarityMetric() = default;
  virtual double similarity(std::string_view a, std::string_view b) const = 0;
  virtual std::string name() const = 0;
};

/// |A ∩ B| / sqrt(|A| |B|) over the sets of lowercased alphanumeric tokens.
double token_set_cosine(std::string_view a, std::string_view b);

class TokenSetCosine final : public SimilarityMetric {
 public:
  double similarity(std::string_view a, std::string_view b) const override { return token_set_cosine(a, b); }
  std::string name() const override { return "token_set_cosine"; }
};

/// Cosine between embedding vectors, negative values clamped to 0.
class EmbeddingSimilarity final : public SimilarityMetric {
 public:
  using Embedder = std::function<std::vector<double>(const std::string&)>;
  explicit EmbeddingSimilarity(Embedder embedder) : embedder_(std::move(embedder)) {}
  double similarity(std::string_view a, std::string_view b) const override;
  std::string name() const override { return "embedding_cosine"; }

 private:
  Embedder embedder_;
};

}  // namespace evocounsel::skills
