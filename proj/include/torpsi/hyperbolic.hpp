#pragma once

// u_tt = -P u + w reduced to the first-order system
//   d/dt (v1, v2) = K (v1, v2) + (0, w),   K = [[0, A], [-P A^{-1}, 0]],
// with A = (I + P)^{1/2}, v1 = A u, v2 = u_t; time integration and energy
// bookkeeping.

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "torpsi/grid.hpp"
#include "torpsi/quantize.hpp"

namespace torpsi {

struct CauchyData {
  GridFunction f0;
  GridFunction f1;
  double s = 0.0;   // Sobolev index of f0
  double nu = 2.0;  // order of P
  double T = 1.0;

  /// Throws DomainError / ShapeError on inconsistent data.
  void validate() const;
};

/// Time-dependent scalar source w(t); the zero forcing is represented without
/// a callback.
class Forcing {
 public:
  using Provider = std::function<GridFunction(double)>;

  Forcing() = default;
  explicit Forcing(Provider provider) : provider_(std::move(provider)) {}

  bool is_zero() const { return !provider_; }
  /// w(t); zero on `spec` when no provider is set.  Throws DomainError on
  /// non-finite samples.
  GridFunction operator()(double t, const GridSpec& spec) const;

 private:
  Provider provider_;
};

struct FirstOrderSystem {
  DenseOperator P;
  DenseOperator A;
  DenseOperator Ainv;
  Eigen::MatrixXcd lower_left;  // -P A^{-1}, or -P for the negative control
  EigenDecomposition eig;       // of P
  Eigen::VectorXd upper_diag;   // A in P's eigenbasis
  Eigen::VectorXd lower_diag;   // lower_left in P's eigenbasis
  double spectral_radius = 0.0;
  double defect = 0.0;          // ||K + K*||
  bool adversarial = false;

  /// The assembled 2-channel block operator.
  DenseOperator K() const;
  GridFunction apply_K(const GridFunction& v) const;
};

/// Requires P flagged positive (see symmetrize_positive).
FirstOrderSystem build_first_order_system(const DenseOperator& P);
/// Negative control: lower-left block -P without A^{-1}.
FirstOrderSystem build_adversarial_system(const DenseOperator& P);

struct StructureReport {
  double sqrt_defect = 0.0;     // ||A^2 - (I+P)|| / ||I+P||
  double inverse_defect = 0.0;  // ||A Ainv - I||
  bool off_diagonal = false;    // diagonal blocks of K identically zero
};

/// Spectral norms.
StructureReport check_structure(const FirstOrderSystem& sys);

struct ZeroOrderReport {
  std::vector<int> shells;         // k
  std::vector<double> shell_norms;  // ||K + K*|| restricted to shell k
  double slope = 0.0;               // fitted against 2^k
  double threshold = 0.15;
  bool pass = false;
};

inline constexpr double kZeroOrderThreshold = 0.15;

/// Shell-wise norms of K + K* on dyadic shells of L; pass iff the fitted
/// growth slope is at most `threshold`.  Throws ShellError with fewer than
/// four shells.
ZeroOrderReport check_zero_order_condition(const FirstOrderSystem& sys,
                                           double threshold = kZeroOrderThreshold);

enum class Integrator { kRk4, kExpMidpoint };

inline constexpr double kRk4StabilityLimit = 2.6;
inline constexpr double kStabilitySafety = 0.9;

struct SolverConfig {
  double dt = 1e-3;
  Integrator integrator = Integrator::kRk4;
  int record_stride = 1;
  /// Split each dt into enough rk4 substeps to satisfy the stability bound
  /// instead of raising StabilityError.
  bool auto_substep = false;
};

/// Largest rk4 step allowed for the system.
double stable_dt(const FirstOrderSystem& sys);

/// One step of size dt from time t.  Throws StabilityError when rk4 is asked
/// for a step outside the stability bound.
GridFunction step(const FirstOrderSystem& sys, const GridFunction& v, double t, double dt,
                  const Forcing& w, Integrator integrator = Integrator::kRk4);

struct EnergyLedger {
  double s = 0.0;
  double nu = 2.0;
  std::vector<double> times;
  std::vector<double> u_norms;           // ||u||_{H^s}
  std::vector<double> ut_norms;          // ||u_t||_{H^{s - nu/2}}
  std::vector<double> v_norms;           // ||v||_{H^{s - nu/2}}
  std::vector<double> forcing_integral;  // int_0^t ||w||^2_{H^{s - nu/2}}
  std::vector<double> conserved_E;       // ||u_t||^2 + Re (P u, u)
  double f0_norm = 0.0;                  // ||f0||_{H^s}
  double f1_norm = 0.0;                  // ||f1||_{H^{s - nu/2}}
  double v0_norm = 0.0;                  // ||v(0)||_{H^{s - nu/2}}
  double fitted_C = 0.0;
};

struct FirstOrderSolution {
  std::vector<double> times;
  std::vector<GridFunction> states;
  EnergyLedger ledger;  // v_norms and forcing_integral only
};

/// Integrates v' = K v + (0, w) on [0, T].  Norms in the ledger use the index
/// `sigma`.  Aborts with StabilityError when ||v||^2 leaves the Gronwall
/// envelope by a factor 10.
FirstOrderSolution solve_first_order(const FirstOrderSystem& sys, const GridFunction& v0,
                                     const Forcing& w, double T, const SolverConfig& cfg,
                                     double sigma = 0.0);

struct WaveSolution {
  std::vector<double> times;
  std::vector<GridFunction> u;
  std::vector<GridFunction> ut;
  EnergyLedger ledger;
};

/// v0 = (A f0, f1); u = A^{-1} v1, u_t = v2.
WaveSolution solve_wave(const FirstOrderSystem& sys, const CauchyData& data, const Forcing& w,
                        const SolverConfig& cfg);

enum class EnergyForm {
  kWave,        // ||u||^2_{H^s} <= C e^{Ct} (||f0||^2 + ||f1||^2 + int ||w||^2)
  kFirstOrder,  // ||v||^2 <= e^{Ct} (||v0||^2 + int ||w||^2)
};

struct EnergyReport {
  EnergyForm form = EnergyForm::kWave;
  double C = 0.0;
  bool holds = false;         // for the supplied C
  double worst_ratio = 0.0;   // max_t lhs / rhs at the supplied C
  double worst_time = 0.0;
  double C_star = 0.0;        // minimal C (bisection to 1e-3); +inf if none found
};

EnergyReport verify_energy_estimate(const EnergyLedger& ledger, double C,
                                    EnergyForm form = EnergyForm::kWave);

/// Right-hand side of the inequality at recorded time index i.
double energy_bound(const EnergyLedger& ledger, std::size_t i, double C, EnergyForm form);

struct ConservedEnergyReport {
  double E0 = 0.0;
  double max_drift = 0.0;  // relative, or absolute when E0 == 0
  bool relative = true;
};

/// E(t) = ||u_t||^2 + Re (P u, u) over a trajectory.
ConservedEnergyReport conserved_energy_probe(const DenseOperator& P,
                                             const std::vector<GridFunction>& u,
                                             const std::vector<GridFunction>& ut);

/// Columns t,u_Hs,ut_Hs_minus_nu_half,forcing_integral,E_conserved,bound_rhs.
void write_ledger_csv(std::ostream& os, const EnergyLedger& ledger);

}  // namespace torpsi
