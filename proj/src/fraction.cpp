#include "dialogos/fraction.hpp"

namespace dialogos {

std::string Fraction::to_fixed(int places) const {
  std::int64_t scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;

  const bool negative = num_ < 0;
  const std::int64_t n = negative ? -num_ : num_;
  // n/den * scale = q + r/den, split so only the remainder is scaled
  const std::int64_t rem_scaled = (n % den_) * scale;
  std::int64_t q = (n / den_) * scale + rem_scaled / den_;
  const std::int64_t r = rem_scaled % den_;
  if (r > den_ - r || (r == den_ - r && (q % 2) != 0)) ++q;

  std::string digits = std::to_string(q % scale);
  std::string out = (negative && q != 0 ? "-" : "") + std::to_string(q / scale);
  if (places > 0) {
    out += '.';
    out.append(static_cast<std::size_t>(places) - digits.size(), '0');
    out += digits;
  }
  return out;
}

}  // namespace dialogos
