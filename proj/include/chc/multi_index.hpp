#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace chc {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxOrder = 10;

using Exponents = std::array<std::uint8_t, kMaxDim>;

/// Coefficient layout shared by all jets of a given dimension.
///
/// Multi-indices are enumerated by total degree, lexicographically within
/// each degree block.  The enumeration for order N-1 is a prefix of the one
/// for order N, so truncation is a resize and jets of different orders agree
/// on the positions they share.
class IndexTable {
public:
  static const IndexTable& get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const Exponents& exponents(int pos) const { return exps_[pos]; }
  int degree(int pos) const { return degree_[pos]; }

  /// Number of positions of degree <= k.
  int size_at_order(int k) const { return offsets_[k + 1]; }

  /// Position of a multi-index, -1 if its degree exceeds the table order.
  int position(const Exponents& e) const;

  /// Position of e - e_var (-1 if e_var == 0) and e + e_var (-1 if it
  /// leaves the table).
  int shifted_down(int pos, int var) const { return down_[pos * dim_ + var]; }
  int shifted_up(int pos, int var) const { return up_[pos * dim_ + var]; }

  struct MulEntry {
    std::int32_t a, b, c;  // coeff[c] += lhs[a] * rhs[b]
  };
  const std::vector<MulEntry>& mul_table() const { return mul_; }

private:
  IndexTable(int dim, int order);

  int dim_, order_;
  std::vector<Exponents> exps_;
  std::vector<std::uint8_t> degree_;
  std::vector<int> offsets_;  // offsets_[k] = # positions of degree < k
  std::vector<std::int32_t> down_, up_;
  std::vector<MulEntry> mul_;
  std::vector<std::int32_t> lookup_;  // packed exponents -> position
};

}  // namespace chc
