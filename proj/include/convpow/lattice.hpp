#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "convpow/error.hpp"

namespace convpow {

using cplx = std::complex<double>;
using Point = std::vector<std::int64_t>;

/// Axis-aligned box of lattice points, inclusive on both ends.
struct BoxDomain {
  std::vector<std::int64_t> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  std::int64_t extent(int axis) const { return hi[axis] - lo[axis] + 1; }
  std::uint64_t volume() const;
  bool contains(std::span<const std::int64_t> p) const;
  bool operator==(const BoxDomain&) const = default;
};

/// Finitely supported complex-valued function on Z^d, stored densely over the
/// bounding box of its nonzero entries. Entries whose magnitude falls below
/// kPruneRel times the max-abs entry are dropped by prune(), which every
/// arithmetic operation applies before returning.
class LatticeFunction {
 public:
  static constexpr double kPruneRel = 1e-15;

  /// The zero function on Z^d.
  explicit LatticeFunction(int dim);

  /// Unit point mass at the origin.
  static LatticeFunction delta(int dim);

  /// Builds from a list of (point, value) pairs. Duplicate points accumulate.
  static LatticeFunction from_entries(
      int dim, const std::vector<std::pair<Point, cplx>>& entries);

  int dim() const { return dim_; }
  bool is_zero() const { return data_.empty(); }

  /// Bounding box of stored entries. Throws errc::input for the zero function.
  const BoxDomain& box() const;

  /// Value at p; zero outside the stored box.
  cplx at(std::span<const std::int64_t> p) const;

  std::size_t nonzero_count() const;
  double max_abs() const;
  double norm1() const;
  /// Sum of all entries, i.e. the value of the characteristic function at 0.
  cplx total_mass() const;

  /// Drops entries with |v| <= rel * max_abs() and shrinks the box.
  void prune(double rel = kPruneRel);

  /// Visits nonzero entries in row-major order: f(point, value).
  void for_each(
      const std::function<void(std::span<const std::int64_t>, cplx)>& f) const;

  /// Scales every entry in place.
  void scale(cplx s);

  double max_abs_diff(const LatticeFunction& other) const;

  // Dense accessors used by the numeric core.
  const std::vector<cplx>& raw() const { return data_; }
  std::vector<cplx>& raw() { return data_; }
  static LatticeFunction from_dense(BoxDomain box, std::vector<cplx> data);

 private:
  int dim_;
  BoxDomain box_;
  std::vector<cplx> data_;  // row-major over box_, last axis contiguous
};

enum class ConvMethod { direct, fft, automatic };

struct ConvPowerOptions {
  ConvMethod method = ConvMethod::automatic;
  /// Largest FFT grid (total cells) a single convolution step may allocate.
  std::uint64_t max_grid_cells = std::uint64_t{1} << 27;
  double prune_rel = LatticeFunction::kPruneRel;
};

/// f * g by direct summation over the sparser operand. Dimensions must match.
LatticeFunction convolve(const LatticeFunction& f, const LatticeFunction& g);

/// n-th convolution power by binary exponentiation. n = 0 yields the unit
/// point mass at the origin. Each FFT step convolves on a power-of-two grid
/// covering the Minkowski-sum box, then crops and prunes.
LatticeFunction conv_power(const LatticeFunction& f, std::uint64_t n,
                           const ConvPowerOptions& opt = {});
LatticeFunction conv_power(const LatticeFunction& f, std::uint64_t n,
                           ConvMethod method);

/// Bounding box of the support. Throws errc::input for the zero function.
BoxDomain support_box(const LatticeFunction& f);

}  // namespace convpow
