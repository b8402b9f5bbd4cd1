#include "convpow/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "convpow/kernels.hpp"

namespace convpow {

namespace {

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

std::uint64_t checked_volume(const std::vector<std::int64_t>& lo,
                             const std::vector<std::int64_t>& hi) {
  std::uint64_t v = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (hi[j] < lo[j]) fail(errc::internal, "box with hi < lo");
    const std::uint64_t e = static_cast<std::uint64_t>(hi[j] - lo[j] + 1);
    if (e != 0 && v > (std::uint64_t{1} << 62) / e)
      fail(errc::resource, "lattice box volume overflows the cell budget");
    v *= e;
  }
  return v;
}

// Hard cap for any dense allocation (2^28 complex cells = 4 GiB).
constexpr std::uint64_t kDenseCellCap = std::uint64_t{1} << 28;

std::vector<std::uint64_t> row_strides(const BoxDomain& b) {
  const int d = b.dim();
  std::vector<std::uint64_t> s(d, 1);
  for (int j = d - 2; j >= 0; --j)
    s[j] = s[j + 1] * static_cast<std::uint64_t>(b.extent(j + 1));
  return s;
}

}  // namespace

std::uint64_t BoxDomain::volume() const { return checked_volume(lo, hi); }

bool BoxDomain::contains(std::span<const std::int64_t> p) const {
  for (int j = 0; j < dim(); ++j)
    if (p[j] < lo[j] || p[j] > hi[j]) return false;
  return true;
}

LatticeFunction::LatticeFunction(int dim) : dim_(dim) {
  if (dim < 1) fail(errc::input, "lattice dimension must be >= 1");
}

LatticeFunction LatticeFunction::delta(int dim) {
  LatticeFunction f(dim);
  f.box_ = BoxDomain{Point(dim, 0), Point(dim, 0)};
  f.data_ = {cplx{1.0, 0.0}};
  return f;
}

LatticeFunction LatticeFunction::from_entries(
    int dim, const std::vector<std::pair<Point, cplx>>& entries) {
  LatticeFunction f(dim);
  if (entries.empty()) return f;
  std::map<Point, cplx> acc;
  for (const auto& [p, v] : entries) {
    if (static_cast<int>(p.size()) != dim)
      fail(errc::input, "entry point dimension does not match function dimension");
    acc[p] += v;
  }
  Point lo = acc.begin()->first, hi = lo;
  for (const auto& [p, v] : acc) {
    (void)v;
    for (int j = 0; j < dim; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  BoxDomain box{lo, hi};
  const std::uint64_t vol = box.volume();
  if (vol > kDenseCellCap)
    fail(errc::resource, "entry bounding box exceeds the dense cell budget");
  std::vector<cplx> data(vol, cplx{0.0, 0.0});
  const auto strides = row_strides(box);
  for (const auto& [p, v] : acc) {
    std::uint64_t idx = 0;
    for (int j = 0; j < dim; ++j)
      idx += strides[j] * static_cast<std::uint64_t>(p[j] - lo[j]);
    data[idx] = v;
  }
  f.box_ = std::move(box);
  f.data_ = std::move(data);
  f.prune();
  return f;
}

LatticeFunction LatticeFunction::from_dense(BoxDomain box,
                                            std::vector<cplx> data) {
  LatticeFunction f(box.dim());
  if (box.volume() != data.size())
    fail(errc::internal, "dense payload does not match box volume");
  f.box_ = std::move(box);
  f.data_ = std::move(data);
  f.prune();
  return f;
}

const BoxDomain& LatticeFunction::box() const {
  if (is_zero())
    fail(errc::input, "the zero function has empty support and no box");
  return box_;
}

cplx LatticeFunction::at(std::span<const std::int64_t> p) const {
  if (static_cast<int>(p.size()) != dim_)
    fail(errc::input, "point dimension does not match function dimension");
  if (is_zero() || !box_.contains(p)) return {0.0, 0.0};
  const auto strides = row_strides(box_);
  std::uint64_t idx = 0;
  for (int j = 0; j < dim_; ++j)
    idx += strides[j] * static_cast<std::uint64_t>(p[j] - box_.lo[j]);
  return data_[idx];
}

std::size_t LatticeFunction::nonzero_count() const {
  std::size_t n = 0;
  for (const auto& v : data_)
    if (v != cplx{0.0, 0.0}) ++n;
  return n;
}

double LatticeFunction::max_abs() const {
  if (data_.empty()) return 0.0;
  return std::sqrt(kernels::max_abs2(data_.data(), data_.size()));
}

double LatticeFunction::norm1() const {
  double s = 0.0;
  for (const auto& v : data_) s += std::abs(v);
  return s;
}

cplx LatticeFunction::total_mass() const {
  if (data_.empty()) return {0.0, 0.0};
  return kernels::sum(data_.data(), data_.size());
}

void LatticeFunction::scale(cplx s) {
  for (auto& v : data_) v *= s;
  prune();
}

void LatticeFunction::prune(double rel) {
  if (data_.empty()) return;
  const double thr = rel * max_abs();
  const int d = dim_;
  Point lo(d), hi(d);
  bool any = false;
  const auto strides = row_strides(box_);
  Point idx(d, 0);
  for (std::uint64_t flat = 0; flat < data_.size(); ++flat) {
    if (std::abs(data_[flat]) <= thr) {
      data_[flat] = {0.0, 0.0};
    } else {
      if (!any) {
        for (int j = 0; j < d; ++j) lo[j] = hi[j] = box_.lo[j] + idx[j];
        any = true;
      } else {
        for (int j = 0; j < d; ++j) {
          lo[j] = std::min(lo[j], box_.lo[j] + idx[j]);
          hi[j] = std::max(hi[j], box_.lo[j] + idx[j]);
        }
      }
    }
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < box_.extent(j)) break;
      idx[j] = 0;
    }
  }
  if (!any) {
    data_.clear();
    box_ = BoxDomain{};
    return;
  }
  BoxDomain nb{lo, hi};
  if (nb == box_) return;
  std::vector<cplx> nd(nb.volume(), cplx{0.0, 0.0});
  const auto ns = row_strides(nb);
  Point q(d, 0);
  for (std::uint64_t flat = 0; flat < nd.size(); ++flat) {
    std::uint64_t src = 0;
    for (int j = 0; j < d; ++j)
      src += strides[j] * static_cast<std::uint64_t>(nb.lo[j] + q[j] - box_.lo[j]);
    nd[flat] = data_[src];
    for (int j = d - 1; j >= 0; --j) {
      if (++q[j] < nb.extent(j)) break;
      q[j] = 0;
    }
  }
  box_ = std::move(nb);
  data_ = std::move(nd);
}

void LatticeFunction::for_each(
    const std::function<void(std::span<const std::int64_t>, cplx)>& f) const {
  if (is_zero()) return;
  const int d = dim_;
  Point p = box_.lo;
  for (std::uint64_t flat = 0; flat < data_.size(); ++flat) {
    if (data_[flat] != cplx{0.0, 0.0}) f(p, data_[flat]);
    for (int j = d - 1; j >= 0; --j) {
      if (++p[j] <= box_.hi[j]) break;
      p[j] = box_.lo[j];
    }
  }
}

double LatticeFunction::max_abs_diff(const LatticeFunction& other) const {
  if (dim_ != other.dim_)
    fail(errc::input, "dimension mismatch in max_abs_diff");
  if (is_zero()) return other.max_abs();
  if (other.is_zero()) return max_abs();
  // Union box walk; both functions vanish outside their stored boxes.
  Point lo(dim_), hi(dim_);
  for (int j = 0; j < dim_; ++j) {
    lo[j] = std::min(box_.lo[j], other.box_.lo[j]);
    hi[j] = std::max(box_.hi[j], other.box_.hi[j]);
  }
  BoxDomain ub{lo, hi};
  double m2 = 0.0;
  Point p = lo;
  const std::uint64_t vol = ub.volume();
  for (std::uint64_t flat = 0; flat < vol; ++flat) {
    const cplx d = at(p) - other.at(p);
    m2 = std::max(m2, d.real() * d.real() + d.imag() * d.imag());
    for (int j = dim_ - 1; j >= 0; --j) {
      if (++p[j] <= hi[j]) break;
      p[j] = lo[j];
    }
  }
  return std::sqrt(m2);
}

BoxDomain support_box(const LatticeFunction& f) { return f.box(); }

namespace {

// Direct convolution: iterate nonzero entries of the sparser operand, add
// shifted copies of the denser one row by row.
LatticeFunction convolve_direct(const LatticeFunction& a,
                                const LatticeFunction& b) {
  const int d = a.dim();
  const LatticeFunction& g = (a.nonzero_count() <= b.nonzero_count()) ? a : b;
  const LatticeFunction& f = (&g == &a) ? b : a;

  Point lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    lo[j] = a.box().lo[j] + b.box().lo[j];
    hi[j] = a.box().hi[j] + b.box().hi[j];
  }
  BoxDomain ob{lo, hi};
  const std::uint64_t vol = ob.volume();
  if (vol > kDenseCellCap) {
    std::ostringstream os;
    os << "direct convolution output box needs " << vol
       << " cells, above the dense cell budget " << kDenseCellCap;
    fail(errc::resource, os.str());
  }
  std::vector<cplx> out(vol, cplx{0.0, 0.0});
  const auto ostr = row_strides(ob);

  const BoxDomain& fb = f.box();
  const auto fstr = row_strides(fb);
  const std::uint64_t row_len = static_cast<std::uint64_t>(fb.extent(d - 1));
  const std::uint64_t rows = fb.volume() / row_len;
  const auto& fdata = f.raw();

  g.for_each([&](std::span<const std::int64_t> p, cplx v) {
    // Base offset of the translated copy: f.lo + p - out.lo (per axis).
    Point r(d, 0);  // row multi-index over f's leading axes
    for (std::uint64_t row = 0; row < rows; ++row) {
      std::uint64_t fidx = 0, oidx = 0;
      for (int j = 0; j < d - 1; ++j) {
        fidx += fstr[j] * static_cast<std::uint64_t>(r[j]);
        oidx += ostr[j] *
                static_cast<std::uint64_t>(fb.lo[j] + r[j] + p[j] - ob.lo[j]);
      }
      oidx += ostr[d - 1] *
              static_cast<std::uint64_t>(fb.lo[d - 1] + p[d - 1] - ob.lo[d - 1]);
      kernels::caxpy(out.data() + oidx, v, fdata.data() + fidx, row_len);
      for (int j = d - 2; j >= 0; --j) {
        if (++r[j] < fb.extent(j)) break;
        r[j] = 0;
      }
    }
  });
  return LatticeFunction::from_dense(std::move(ob), std::move(out));
}

std::uint64_t next_pow2(std::uint64_t v) {
  std::uint64_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

struct FftwBuf {
  fftw_complex* p = nullptr;
  explicit FftwBuf(std::uint64_t cells) {
    p = fftw_alloc_complex(cells);
    if (!p) fail(errc::resource, "fftw buffer allocation failed");
  }
  ~FftwBuf() { fftw_free(p); }
  FftwBuf(const FftwBuf&) = delete;
  FftwBuf& operator=(const FftwBuf&) = delete;
  cplx* c() { return reinterpret_cast<cplx*>(p); }
};

// Convolution of one pair on a power-of-two grid covering the Minkowski-sum
// box. Grid values outside that box are discarded: they carry only transform
// roundoff, and keeping them would let noise masquerade as far-field support.
LatticeFunction convolve_fft(const LatticeFunction& a, const LatticeFunction& b,
                             std::uint64_t max_grid_cells) {
  const int d = a.dim();
  Point lo(d), hi(d);
  std::vector<int> dims(d);
  std::uint64_t cells = 1;
  for (int j = 0; j < d; ++j) {
    lo[j] = a.box().lo[j] + b.box().lo[j];
    hi[j] = a.box().hi[j] + b.box().hi[j];
    const std::uint64_t need = static_cast<std::uint64_t>(hi[j] - lo[j] + 1);
    const std::uint64_t n = next_pow2(need);
    dims[j] = static_cast<int>(n);
    if (cells > (std::uint64_t{1} << 62) / n)
      fail(errc::resource, "fft grid size overflows");
    cells *= n;
  }
  if (cells > max_grid_cells) {
    std::ostringstream os;
    os << "fft convolution requires a ";
    for (int j = 0; j < d; ++j) os << (j ? "x" : "") << dims[j];
    os << " grid (" << cells << " cells), above the budget " << max_grid_cells
       << " cells";
    fail(errc::resource, os.str());
  }

  FftwBuf A(cells), B(cells);
  std::fill(A.c(), A.c() + cells, cplx{0.0, 0.0});
  std::fill(B.c(), B.c() + cells, cplx{0.0, 0.0});

  std::vector<std::uint64_t> gstr(d, 1);
  for (int j = d - 2; j >= 0; --j)
    gstr[j] = gstr[j + 1] * static_cast<std::uint64_t>(dims[j + 1]);

  auto scatter = [&](const LatticeFunction& src, cplx* dst) {
    const auto& sb = src.box();
    src.for_each([&](std::span<const std::int64_t> p, cplx v) {
      std::uint64_t idx = 0;
      for (int j = 0; j < d; ++j)
        idx += gstr[j] * static_cast<std::uint64_t>(p[j] - sb.lo[j]);
      dst[idx] = v;
    });
  };
  scatter(a, A.c());
  scatter(b, B.c());

  fftw_plan fwdA, fwdB, bwd;
  {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex());
    fwdA = fftw_plan_dft(d, dims.data(), A.p, A.p, FFTW_FORWARD, FFTW_ESTIMATE);
    fwdB = fftw_plan_dft(d, dims.data(), B.p, B.p, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft(d, dims.data(), A.p, A.p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwdA);
  fftw_execute(fwdB);
  kernels::cmul(A.c(), A.c(), B.c(), cells);
  fftw_execute(bwd);
  {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex());
    fftw_destroy_plan(fwdA);
    fftw_destroy_plan(fwdB);
    fftw_destroy_plan(bwd);
  }

  const double inv = 1.0 / static_cast<double>(cells);
  BoxDomain ob{lo, hi};
  std::vector<cplx> out(ob.volume());
  Point q(d, 0);
  for (std::uint64_t flat = 0; flat < out.size(); ++flat) {
    std::uint64_t src = 0;
    for (int j = 0; j < d; ++j)
      src += gstr[j] * static_cast<std::uint64_t>(q[j]);
    out[flat] = A.c()[src] * inv;
    for (int j = d - 1; j >= 0; --j) {
      if (++q[j] < ob.extent(j)) break;
      q[j] = 0;
    }
  }
  return LatticeFunction::from_dense(std::move(ob), std::move(out));
}

}  // namespace

LatticeFunction convolve(const LatticeFunction& f, const LatticeFunction& g) {
  if (f.dim() != g.dim())
    fail(errc::input, "convolve: operand dimensions differ");
  if (f.is_zero() || g.is_zero()) return LatticeFunction(f.dim());
  return convolve_direct(f, g);
}

LatticeFunction conv_power(const LatticeFunction& f, std::uint64_t n,
                           ConvMethod method) {
  ConvPowerOptions opt;
  opt.method = method;
  return conv_power(f, n, opt);
}

LatticeFunction conv_power(const LatticeFunction& f, std::uint64_t n,
                           const ConvPowerOptions& opt) {
  if (n == 0) return LatticeFunction::delta(f.dim());
  if (f.is_zero()) return LatticeFunction(f.dim());

  ConvMethod method = opt.method;
  if (method == ConvMethod::automatic) {
    // Direct stays competitive while the final box is small; beyond that the
    // grid path wins.
    double final_vol = 1.0;
    for (int j = 0; j < f.dim(); ++j)
      final_vol *= static_cast<double>(n) *
                       static_cast<double>(f.box().extent(j) - 1) + 1.0;
    method = (n <= 64 && final_vol <= 1e6) ? ConvMethod::direct : ConvMethod::fft;
  }

  auto step = [&](const LatticeFunction& a, const LatticeFunction& b) {
    LatticeFunction r = (method == ConvMethod::direct)
                            ? convolve(a, b)
                            : convolve_fft(a, b, opt.max_grid_cells);
    if (opt.prune_rel != LatticeFunction::kPruneRel) r.prune(opt.prune_rel);
    return r;
  };

  LatticeFunction base = f;
  base.prune(opt.prune_rel);
  LatticeFunction result(f.dim());
  bool have_result = false;
  std::uint64_t k = n;
  while (k) {
    if (k & 1) {
      result = have_result ? step(result, base) : base;
      have_result = true;
    }
    k >>= 1;
    if (k) base = step(base, base);
  }
  return result;
}

}  // namespace convpow
