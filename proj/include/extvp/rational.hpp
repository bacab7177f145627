#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "extvp/error.hpp"

namespace extvp {

// Non-negative exact fraction, always stored in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw ConfigError("rational with zero denominator");
    const auto g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  constexpr std::uint64_t num() const noexcept { return num_; }
  constexpr std::uint64_t den() const noexcept { return den_; }
  constexpr bool is_zero() const noexcept { return num_ == 0; }
  constexpr bool is_one() const noexcept { return num_ == den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend constexpr bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
    const auto lhs = static_cast<unsigned __int128>(a.num_) * b.den_;
    const auto rhs = static_cast<unsigned __int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "3/4", "0.25", "1", "1.0".
  static Rational parse(std::string_view text);

 private:
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
  auto bad = [&] { return ConfigError("not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) throw bad();
  auto digits = [&](std::string_view s) {
    if (s.empty() || s.size() > 18) throw bad();
    std::uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw bad();
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto d = digits(text.substr(slash + 1));
    if (d == 0) throw bad();
    return Rational(digits(text.substr(0, slash)), d);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw bad();
    std::uint64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const auto w = whole.empty() ? 0 : digits(whole);
    const auto f = frac.empty() ? 0 : digits(frac);
    return Rational(w * den + f, den);
  }
  return Rational(digits(text), 1);
}

}  // namespace extvp
