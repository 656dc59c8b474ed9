#pragma once

// Finite-level uniform quantizer on [-E, E] with R (odd) levels, and the
// integer index code used to transmit sums of quantized measurements.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>

#include "qtrig/errors.hpp"

namespace qtrig {

/// Odd level count R = 2 R0 + 1.
class Levels {
 public:
  explicit Levels(int r) : r_(r) {
    if (r < 1 || r % 2 == 0)
      throw DomainError("number of quantization levels must be a positive odd integer, got " +
                        std::to_string(r));
  }
  [[nodiscard]] int count() const noexcept { return r_; }
  [[nodiscard]] int half() const noexcept { return (r_ - 1) / 2; }

 private:
  int r_;
};

struct QuantizerSpec {
  double range;  // E
  Levels levels;

  QuantizerSpec(double e, Levels r) : range(e), levels(r) {
    if (!(e > 0.0) || !std::isfinite(e))
      throw DomainError("quantization range must be positive and finite");
  }

  [[nodiscard]] double step() const { return 2.0 * range / levels.count(); }
  [[nodiscard]] double value_of(long long p) const {
    return 2.0 * static_cast<double>(p) * range / levels.count();
  }
};

/// Bin index p of z, so that Q(z) = 2pE/R.
///
/// Bins are left-open and right-closed, (2p-1)E/R < z <= (2p+1)E/R for p >= 1,
/// mirrored for negative z; |z| <= E/R maps to 0 and z = -E maps to -R0.
inline int quantize_index(const QuantizerSpec& q, double z) {
  const double e = q.range;
  const int r = q.levels.count();
  const int r0 = q.levels.half();
  if (!(std::abs(z) <= e))
    throw SaturationError("quantizer saturated: |z| = " + std::to_string(std::abs(z)) +
                          " > E = " + std::to_string(e));
  const double mag = std::abs(z);
  auto edge = [&](int p) { return (2.0 * p + 1.0) * e / r; };  // upper edge of bin p
  if (mag <= edge(0)) return 0;
  int p = static_cast<int>(std::lround(mag * r / (2.0 * e)));
  p = std::clamp(p, 1, r0);
  // Restore the half-open rule where rounding put mag on the wrong side.
  while (p < r0 && mag > edge(p)) ++p;
  while (p > 1 && mag <= edge(p - 1)) --p;
  return z < 0.0 ? -p : p;
}

inline double quantize(const QuantizerSpec& q, double z) { return q.value_of(quantize_index(q, z)); }

/// Index of a transmitted sum: the value is 2pE/R for the shared E at send time.
struct QuantIndex {
  long long p = 0;
  int dtilde = 1;
  int r0 = 0;

  [[nodiscard]] long long bound() const { return static_cast<long long>(dtilde) * r0; }
  [[nodiscard]] long long alphabet_size() const { return 2 * bound() + 1; }
};

/// 2 * dtilde * R0 + 1.
inline long long index_alphabet_size(Levels r, int dtilde) {
  return 2LL * dtilde * r.half() + 1;
}

/// Bits needed for one index: ceil(log2(alphabet size)).
inline int index_bits(long long alphabet) {
  int bits = 0;
  while ((1LL << bits) < alphabet) ++bits;
  return bits;
}

/// Index of an integer bin sum, checked against the alphabet.
inline QuantIndex encode_bins(long long p, Levels r, int dtilde) {
  if (dtilde < 1) throw DomainError("degree bound must be at least 1");
  QuantIndex idx{p, dtilde, r.half()};
  if (std::llabs(p) > idx.bound())
    throw DomainError("index " + std::to_string(p) + " exceeds degree-bound alphabet +/-" +
                      std::to_string(idx.bound()));
  return idx;
}

/// Encodes a sum of quantized values (each an exact multiple of 2E/R).
inline QuantIndex encode_sum(const QuantizerSpec& q, int dtilde, std::span<const double> values) {
  if (static_cast<long long>(values.size()) > dtilde)
    throw DomainError("more summands than the degree bound allows");
  long long p = 0;
  for (double v : values) {
    const double m = v / q.step();
    const double rounded = std::round(m);
    if (std::abs(m - rounded) > 1e-9 || std::abs(rounded) > q.levels.half())
      throw DomainError("value " + std::to_string(v) + " is not a quantizer level");
    p += static_cast<long long>(rounded);
  }
  return encode_bins(p, q.levels, dtilde);
}

/// 2 p E_now / R.
inline double decode_sum(const QuantIndex& idx, double e_now, Levels r) {
  if (std::llabs(idx.p) > idx.bound()) throw DomainError("index outside alphabet");
  if (r.half() != idx.r0) throw DomainError("level count does not match the index alphabet");
  return QuantizerSpec(e_now, r).value_of(idx.p);
}

}  // namespace qtrig
