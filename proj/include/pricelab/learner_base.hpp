#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pricelab/errors.hpp"
#include "pricelab/rng.hpp"

namespace pricelab {

/// Evenly spaced prices {1/K, 2/K, ..., 1}.
class ArmGrid {
 public:
  explicit ArmGrid(int K) {
    if (K < 1) throw ParameterError("arm grid needs K >= 1");
    prices_.reserve(static_cast<std::size_t>(K));
    for (int i = 1; i <= K; ++i) prices_.push_back(static_cast<double>(i) / K);
  }
  explicit ArmGrid(std::vector<double> prices) : prices_(std::move(prices)) {
    if (prices_.empty()) throw ParameterError("arm list is empty");
    for (std::size_t i = 0; i < prices_.size(); ++i) {
      if (!(prices_[i] >= 0.0 && prices_[i] <= 1.0))
        throw ParameterError("arm prices must lie in [0,1]");
      if (i > 0 && !(prices_[i] > prices_[i - 1]))
        throw ParameterError("arm prices must be strictly increasing");
    }
  }

  int size() const { return static_cast<int>(prices_.size()); }
  double operator[](int i) const { return prices_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& prices() const { return prices_; }

 private:
  std::vector<double> prices_;
};

class Learner {
 public:
  virtual ~Learner() = default;

  virtual double choose(RandomStream& rng) = 0;
  virtual void update(double price, bool sold) = 0;
  virtual std::string label() const = 0;

  // Declared arm set; empty for continuum learners.
  virtual const std::vector<double>& arms() const = 0;
  // Index into arms() of the most recent choice, or -1.
  virtual int last_arm() const = 0;
  virtual std::vector<std::uint64_t> pull_counts() const = 0;

  std::uint64_t updates() const { return updates_; }

 protected:
  std::uint64_t updates_ = 0;
};

}  // namespace pricelab
