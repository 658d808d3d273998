#pragma once

#include <span>
#include <vector>

#include "chc/jet.hpp"

namespace chc {

/// f(args[0], ..., args[n-1]) where f has dimension n and every argument is
/// a jet in the target variables with vanishing constant term.  Exact to the
/// common truncation order.
Jet jet_substitute(const Jet& f, std::span<const Jet> args);

/// Compose f with the affine change x = A y (+ no shift); A is dim(f) x m
/// row-major.  Base points are handled by the caller.
Jet jet_linear_change(const Jet& f, std::span<const double> A, int m, int order);

/// Inverse of a jet map F: R^n -> R^n with F(0) = 0 and invertible Jacobian;
/// returns G with F(G(y)) = y to the table order.
std::vector<Jet> jet_invert_map(std::span<const Jet> F);

/// Coordinates (y_1..y_{n-1}, t) adapted to a scalar jet: t = sigma(x) and
/// y_i span a complement of grad sigma(0).  Used to read off the order of
/// vanishing along {sigma = 0} and to divide jets by powers of sigma.
class AdaptedCoords {
public:
  AdaptedCoords(const Jet& sigma);

  int dim() const { return dim_; }

  /// Expansion of f in adapted coordinates (last variable = sigma).
  Jet to_adapted(const Jet& f) const;
  /// Back from adapted coordinates to the original variables.
  Jet from_adapted(const Jet& ftilde) const;

  /// Smallest k with a t^k coefficient above tol * scale, or order+1 when f
  /// vanishes to the table order.  Also reports the largest coefficient seen
  /// below the returned order (diagnostics for improvement failures).
  int vanishing_order(const Jet& f, double tol, double* below = nullptr) const;

  /// f / sigma^k in original coordinates; requires f = O(sigma^k).
  Jet divide(const Jet& f, int k, double tol = 1e-7) const;

  /// Coefficient jet of t^k: f expanded as sum_k t^k c_k(y), with c_k pulled
  /// back to the original variables as a function constant in the t-direction.
  Jet slice_coefficient(const Jet& f, int k) const;

private:
  int dim_, order_;
  std::vector<Jet> forward_;  // Phi: x -> (y, t)
  std::vector<Jet> inverse_;  // Psi: (y, t) -> x
};

}  // namespace chc
