#pragma once
// Solution searches: the N+ minimiser, the N- minimiser, bubble-seeded N-
// solutions on annular domains, a minimax candidate, and continuation in mu.

#include <optional>
#include <string>
#include <vector>

#include "bnp/functional.hpp"
#include "bnp/nehari.hpp"

namespace bnp {

enum class SeedKind { ZeroRelax, GroundStateRay, Bubble, Minimax };
std::string to_string(SeedKind k);
SeedKind seed_kind_from_string(const std::string& s);

struct SolutionRecord {
  double lambda = 0.0;
  double mu = 0.0;
  Field v;
  Field u;  ///< v + mu phi
  double energy = 0.0;
  NehariClass nehari_class;
  double grad_norm = 0.0;  ///< ||gradient(v)||_2, the PDE residual
  bool positive = false;   ///< u > 0 at every interior node
  bool converged = false;
  SeedKind seed = SeedKind::ZeroRelax;
  std::vector<double> seed_direction;  ///< bubble direction, empty otherwise
  int iterations = 0;
  std::vector<double> barycenter;
  std::vector<double> gradient_direction;
  std::string note;
};

struct SolverOptions {
  int max_descent_iterations = 400;
  /// Hand over to Newton once ||grad||_{H^-1} <= descent_tol (1 + |energy|).
  double descent_tol = 1e-6;
  int max_newton_iterations = 40;
  /// Newton target: ||grad||_2 <= newton_tol (1 + |energy|).
  double newton_tol = 1e-9;
  int max_krylov_iterations = 20000;
  /// Multiplies every iteration cap (used to demonstrate non-convergence).
  int budget_factor = 1;
};

/// (1/N) S^{N/2} with the discrete S.
double energy_quantum(const Params& p);

/// Residual tolerance 1e-7 (1 + ||v||) used for acceptance.
double residual_tolerance(const Field& v);

/// One preconditioned gradient step from 0: v = A^{-1}(lambda mu phi + (mu phi)^{2*-1}).
Field zero_relax_seed(const Params& p);

/// Solves A y = r for the Dirichlet stencil operator.
Field inverse_laplacian(const Field& r, double rel_tol = 1e-10);

/// Fills u, energy, class, residual, positivity and barycentres for v.
SolutionRecord make_record(const Field& v, const Params& p, SeedKind seed);

/// Converged, positive, on N+ or N-, and below residual_tolerance.
bool accepted(const SolutionRecord& r);

/// Damped Newton on the full gradient. CG when the Hessian is expected to be
/// positive definite, MINRES otherwise. Returns true on convergence.
bool newton_polish(Field& v, const Params& p, bool definite, const SolverOptions& opts,
                   int& iterations);

/// Projected descent on N+ (rescale to t+, absolute-value move), Newton polish.
/// Throws PreconditionError for mu = 0 and ArgumentError for a zero seed.
SolutionRecord minimize_on_Nplus(const Params& p, const Field& seed, const SolverOptions& opts = {},
                                 SeedKind kind = SeedKind::ZeroRelax);

/// Descent of J(w) = I(t-(w) w) over w >= 0, ||w||_{2*} = 1, Newton polish.
SolutionRecord minimize_on_Nminus(const Params& p, const Field& seed, const SolverOptions& opts = {},
                                  SeedKind kind = SeedKind::GroundStateRay);

/// Positive solution of the mu = 0 problem, computed once per lambda and
/// cached in the spectral data.
Field ground_state(const Params& p, const SolverOptions& opts = {});

struct BubbleSeed {
  double epsilon = 0.0;
  std::vector<double> direction;
  double delta0 = 0.0;
  Field field;
};

/// Cut-off concentration profile
///   (N(N-2) e^2)^{(N-2)/4} / (e^2 + |x - (1-e) y|^2)^{(N-2)/2}
/// times a C^2 radial cutoff rising on [d0, 2 d0] and falling on
/// [1/(2 d0), 1/d0].
BubbleSeed make_bubble(double epsilon, const std::vector<double>& direction, const DomainPtr& domain,
                       double delta0);

/// The 2N coordinate directions +-e_a.
std::vector<std::vector<double>> coordinate_directions(int dim);

struct MultistartAttempt {
  std::vector<double> direction;
  double seed_energy = 0.0;  ///< energy of the N- projection of v+ + U
  bool seed_below_threshold = false;
  bool converged = false;
  double energy = 0.0;
  std::string error;
};

struct MultistartResult {
  std::vector<SolutionRecord> records;  ///< distinct, converged
  std::vector<MultistartAttempt> attempts;
  double threshold = 0.0;  ///< m+ + S^{N/2}/N
};

/// Seeds v+ + U_{eps,y} projected onto N- for every direction, minimises on
/// N-, and keeps records more than 1e-4 apart in the H^1_0 norm.
MultistartResult multistart_Nminus(const Params& p, const SolutionRecord& vplus,
                                   const std::vector<std::vector<double>>& directions,
                                   double epsilon, const SolverOptions& opts = {});

struct MinimaxResult {
  std::optional<SolutionRecord> record;
  double family_sup = 0.0;       ///< sup of J over the relaxed family
  double boundary_level = 0.0;   ///< max of J over the pinned members
  double window_low = 0.0;       ///< m+ + S^{N/2}/N
  double window_high = 0.0;      ///< m- + S^{N/2}/N
  int relaxation_sweeps = 0;
  std::string reason;            ///< why nothing was accepted
};

/// Boundary-pinned lattice family in the ball of radius 1 - eps, relaxed by
/// descending its current argmax, then Newton polish of the maximiser.
MinimaxResult minimax_gamma(const Params& p, double epsilon, double m_plus, double m_minus,
                            const std::vector<SolutionRecord>& known,
                            const SolverOptions& opts = {});

struct BranchPoint {
  double mu = 0.0;
  double energy_plus = 0.0;
  double energy_minus = 0.0;
  bool converged_plus = false;
  bool converged_minus = false;
  bool accepted_plus = false;
};

struct MuStarResult {
  double lambda = 0.0;
  double mu_star = 0.0;  ///< last successful mu: lower estimate of the supremum
  std::vector<BranchPoint> branch;
  std::vector<SolutionRecord> plus_records;  ///< filled when keep_records is set
  int solves = 0;
};

struct ContinuationOptions {
  double mu_start = 0.01;
  double step_start = 0.01;
  double min_step_rel = 1e-6;
  int max_solves = 200;
  bool track_minus = true;
  bool keep_records = false;
};

/// Continuation of the N+ branch in mu with step doubling on success and
/// halving on failure; stops after three consecutive halvings below
/// min_step_rel * mu. Throws PreconditionError for lambda >= lambda1.
MuStarResult estimate_mu_star(const Params& base, double lambda, const ContinuationOptions& copts = {},
                              const SolverOptions& opts = {});

struct ExistenceBoundary {
  std::vector<double> lambda_grid;
  std::vector<double> mu_star_estimates;
  std::vector<std::vector<BranchPoint>> branch_data;
};

}  // namespace bnp
