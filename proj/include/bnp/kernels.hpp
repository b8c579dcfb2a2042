#pragma once
// Data-parallel inner loops over the interior nodes of a grid.
//
// Every kernel exists twice: the OpenMP version in bnp::kernels is what the
// library calls; bnp::kernels::serial is the plain-loop reference kept for
// testing and benchmarking. Reductions in the OpenMP versions sum fixed-size
// blocks and combine the partials in block order, so results do not depend
// on the thread count.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bnp::kernels {

/// Nodes per reduction block.
inline constexpr std::size_t kBlock = 4096;

/// |x|^q for x >= 0; integral q is expanded into multiplications and
/// |x| < 1e-300 flushes to zero.
class PowerLaw {
 public:
  explicit PowerLaw(double q);

  double exponent() const noexcept { return q_; }
  bool integral() const noexcept { return integral_; }

  double operator()(double x) const noexcept {
    if (q_ == 0.0) return 1.0;
    if (x < 1e-300) return 0.0;
    if (integral_) {
      double r = x;
      for (int k = 1; k < iq_; ++k) r *= x;
      return r;
    }
    return std::exp(q_ * std::log(x));
  }

 private:
  double q_;
  int iq_ = 0;
  bool integral_ = false;
};

/// Matrix-free (2N+1)-point Dirichlet Laplacian on a masked tensor grid.
struct Stencil {
  int dim = 0;
  std::size_t nodes = 0;
  /// nodes x 2*dim entries, ordered (axis 0 -, axis 0 +, axis 1 -, ...).
  /// Non-negative: interior neighbour index. Negative: -1 - boundary id.
  std::vector<std::int32_t> neighbors;
  std::vector<double> inv_h2;
  double diag = 0.0;

  std::int32_t neighbor(std::size_t i, int axis, int side) const {
    return neighbors[i * 2 * static_cast<std::size_t>(dim) + 2 * axis + side];
  }
};

/// Sums needed by one evaluation of a fibering map along s = t*v + shift,
/// with q = 2* - 2.
struct FiberingSums {
  double pow_p = 0.0;   // sum |s|^{2*}
  double pow_pv = 0.0;  // sum |s|^{q} s v
  double pow_qv2 = 0.0; // sum |s|^{q} v^2
};

// ---- OpenMP kernels -------------------------------------------------------

void laplacian(const Stencil& st, std::span<const double> u, std::span<double> out);
/// sum over grid edges of inv_h2 * (difference)^2, exterior values zero.
double edge_energy(const Stencil& st, std::span<const double> u);
double dot(std::span<const double> a, std::span<const double> b);
double abs_pow_sum(std::span<const double> u, const PowerLaw& p);
/// out = alpha * x + y
void axpy(double alpha, std::span<const double> x, std::span<const double> y,
          std::span<double> out);
void scale(double alpha, std::span<double> x);
/// out = lap_v - lambda * u - |u|^q u
void gradient_assemble(std::span<const double> lap_v, std::span<const double> u, double lambda,
                       const PowerLaw& q, std::span<double> out);
/// out = lap_h - lambda * h - coef * |u|^q h
void hessian_assemble(std::span<const double> lap_h, std::span<const double> u,
                      std::span<const double> h, double lambda, double coef, const PowerLaw& q,
                      std::span<double> out);
FiberingSums fibering_sums(double t, std::span<const double> v, std::span<const double> shift,
                           const PowerLaw& q);

// ---- serial reference -----------------------------------------------------

namespace serial {
void laplacian(const Stencil& st, std::span<const double> u, std::span<double> out);
double edge_energy(const Stencil& st, std::span<const double> u);
double dot(std::span<const double> a, std::span<const double> b);
double abs_pow_sum(std::span<const double> u, const PowerLaw& p);
void axpy(double alpha, std::span<const double> x, std::span<const double> y,
          std::span<double> out);
void scale(double alpha, std::span<double> x);
void gradient_assemble(std::span<const double> lap_v, std::span<const double> u, double lambda,
                       const PowerLaw& q, std::span<double> out);
void hessian_assemble(std::span<const double> lap_h, std::span<const double> u,
                      std::span<const double> h, double lambda, double coef, const PowerLaw& q,
                      std::span<double> out);
FiberingSums fibering_sums(double t, std::span<const double> v, std::span<const double> shift,
                           const PowerLaw& q);
}  // namespace serial

}  // namespace bnp::kernels
