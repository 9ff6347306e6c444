#pragma once

#include <cstddef>
#include <vector>

namespace confdiff {

using Vector = std::vector<double>;

enum class Label : int { positive = 1, negative = -1 };

constexpr double label_sign(Label y) noexcept { return static_cast<double>(static_cast<int>(y)); }
constexpr Label flip(Label y) noexcept { return y == Label::positive ? Label::negative : Label::positive; }

/// Unlabeled pair with confidence difference c = p(+1 | x') - p(+1 | x).
struct ConfDiffPair {
  Vector x;
  Vector x_prime;
  double c = 0.0;

  friend bool operator==(const ConfDiffPair&, const ConfDiffPair&) = default;
};

struct ConfDiffDataset {
  std::vector<ConfDiffPair> pairs;
  double class_prior = 0.5;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
  std::size_t dim() const noexcept { return pairs.empty() ? 0 : pairs.front().x.size(); }
  double negative_prior() const noexcept { return 1.0 - class_prior; }

  // Throws InvalidInput on prior outside (0, 1), |c| > 1, or ragged dimensions.
  void validate() const;

  friend bool operator==(const ConfDiffDataset&, const ConfDiffDataset&) = default;
};

/// Ordered pair for pairwise-comparison learning: x is at least as likely
/// positive as x_prime. No labels are carried.
struct ComparisonPair {
  Vector x;
  Vector x_prime;

  friend bool operator==(const ComparisonPair&, const ComparisonPair&) = default;
};

struct PcompDataset {
  std::vector<ComparisonPair> pairs;
  double class_prior = 0.5;

  std::size_t size() const noexcept { return pairs.size(); }
  std::size_t dim() const noexcept { return pairs.empty() ? 0 : pairs.front().x.size(); }
  void validate() const;

  friend bool operator==(const PcompDataset&, const PcompDataset&) = default;
};

struct SoftLabeledExample {
  Vector x;
  double r = 0.0;  // p(y = +1 | x)

  friend bool operator==(const SoftLabeledExample&, const SoftLabeledExample&) = default;
};

struct LabeledExample {
  Vector x;
  Label y = Label::positive;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Model scores for the two members of a pair.
struct PairScores {
  double x = 0.0;
  double x_prime = 0.0;

  friend bool operator==(const PairScores&, const PairScores&) = default;
};

}  // namespace confdiff
