// dialogos/fraction.hpp — exact non-negative count ratios.
//
// Shares, scores and fractions in reports are ratios of event counts. Keeping
// them exact makes ties and round-half-even formatting reproducible.
#pragma once

#include <cstdint>
#include <numeric>
#include <string>

namespace dialogos {

class Fraction {
 public:
  constexpr Fraction() = default;
  // den == 0 is normalised to 0/1.
  constexpr Fraction(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) {
      num_ = 0;
      den_ = 1;
    }
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }
  [[nodiscard]] constexpr double value() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend constexpr Fraction operator+(Fraction a, Fraction b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend constexpr Fraction operator-(Fraction a, Fraction b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend constexpr Fraction operator*(Fraction a, Fraction b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend constexpr bool operator==(Fraction a, Fraction b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr auto operator<=>(Fraction a, Fraction b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
  }

  // Decimal text with `places` digits, rounding half to even.
  [[nodiscard]] std::string to_fixed(int places = 4) const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace dialogos
