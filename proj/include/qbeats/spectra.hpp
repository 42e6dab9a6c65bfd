#ifndef QBEATS_SPECTRA_HPP
#define QBEATS_SPECTRA_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "qbeats/bloch.hpp"

namespace qbeats {

// Lorentzian filter preceding photodetection. `nu` is the filter detuning:
// omega - omega_L for driven fluorescence, omega - omega_13 for spontaneous
// emission (where the rotating frame sits on the 1-3 transition).
struct FilterSettings {
  double bandwidth = 0.5;  // Gamma > 0, full width, units of gamma
  double nu = 0.0;
};

// Generalized Rabi frequencies of the two pi transitions and the derived
// carrier/envelope frequencies of the beats.
struct BeatFrequencies {
  double omega1 = 0.0;      // sqrt(4 Omega^2 + Delta^2)
  double omega2 = 0.0;      // sqrt(4 Omega^2 + (delta - Delta)^2)
  double omega_av = 0.0;    // (omega2 + omega1) / 2
  double omega_beat = 0.0;  // (omega2 - omega1) / 2
};

BeatFrequencies rabi_frequencies(const SystemParams& params);

struct GridMeta {
  SystemParams params;
  double filter_bandwidth = 0.0;
  std::string initial_tag;  // "excited-superposition", "ground-superposition", "explicit"
};

// Rectangular (nu, t) grid of spectrum values, values(i, j) = S(nus[i], times[j]).
struct SpectrumGrid {
  std::vector<double> nus;
  std::vector<double> times;
  Eigen::MatrixXd values;
  GridMeta meta;
};

// Cache of e^{M tau} on the dyadic subdivisions of a fixed horizon, shared
// between the quadrature nodes of every spectrum point with the same (M, t).
// Internally synchronized; entries are deterministic functions of the key,
// so concurrent evaluation order cannot change any value.
class PropagatorTable {
 public:
  PropagatorTable(const Mat8& m, double horizon, int max_level);

  // e^{M tau} at tau = horizon * idx / 2^max_level.
  const Mat8& at(std::uint32_t idx) const;

  double horizon() const { return horizon_; }
  int max_level() const { return max_level_; }
  const Mat8& generator() const { return m_; }

 private:
  Mat8 m_;
  double horizon_;
  int max_level_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::uint32_t, std::unique_ptr<Mat8>> cache_;
};

// Eberly-Wodkiewicz physical spectrum S(nu, t, Gamma) of the pi emission:
// the doubly filtered dipole correlation
//   S = 2 Gamma Re int_0^t dt1 e^{-Gamma(t-t1)}
//         int_0^{t-t1} dtau e^{(Gamma/2 - i nu) tau} [g13 + g24](t1, tau).
// The inner delay integral is evaluated semi-analytically through the
// resolvent of Gamma/2 - i nu + M (with a guarded fallback when that matrix
// is ill-conditioned); the outer integral uses composite trapezoid/Simpson
// refinement until the relative change drops below cfg.quad_rel_tol.
// Throws QuadratureNotConverged if the panel cap is hit.
double ew_spectrum(const GeneratorMatrix& g, const BlochVector& q0,
                   const FilterSettings& f, double t,
                   const NumericsConfig& cfg = {});

// Same, with a caller-provided propagator table (table horizon must be t).
double ew_spectrum(const GeneratorMatrix& g, const BlochVector& q0,
                   const FilterSettings& f, double t,
                   const PropagatorTable& table, const NumericsConfig& cfg = {});

// Exact closed form of the spontaneous-emission spectrum,
//   S_SE = F(t,0) / ((gamma-Gamma)^2 + 4 nu^2)
//        + F(t,delta) / ((gamma-Gamma)^2 + 4 (nu+delta)^2),
//   F(t,x) = 2 Gamma (e^{-Gamma t} + e^{-gamma t})
//          - 4 Gamma e^{-(gamma+Gamma)t/2} cos((nu+x) t).
// Near Gamma = gamma (|gamma - Gamma| < cfg.narrowing_switch_rtol * gamma)
// the 0/0 form switches to the sinc-squared limit below.
double se_spectrum_analytic(double gamma, double delta,
                            const FilterSettings& f, double t,
                            const NumericsConfig& cfg = {});

// Extreme narrowing limit Gamma = gamma:
//   S = Gamma t^2 e^{-Gamma t} [sinc^2(nu t/2) + sinc^2((nu+delta) t/2)] / 2.
double se_spectrum_narrowing_limit(double gamma, double delta, double nu,
                                   double t);

// Stationary Wiener-Khintchine spectrum with phenomenological broadening,
// evaluated in closed form through a resolvent solve on the steady state:
//   Re[ e_A31^T ((broadening + i nu) I - M)^{-1} u_ss
//     + e_A42^T ((broadening + i nu) I - M)^{-1} v_ss ].
// broadening = 0 is rejected with SingularResolvent (the elastic delta
// component is not modeled); broadening < 0 is invalid.
double wk_spectrum(const GeneratorMatrix& g, double nu, double broadening,
                   const NumericsConfig& cfg = {});

// Finite-time perfect-resolution spectrum
//   P(nu) = int_0^T dt1 int_0^T dt2 e^{-i nu (t1 - t2)} G(t1, t2),
// folded to ordered times via G(t2, t1) = G(t1, t2)^*; the proportionality
// constant is 1 and no window is applied.
double perfect_resolution_spectrum(const GeneratorMatrix& g,
                                   const BlochVector& q0, double nu,
                                   double horizon,
                                   const NumericsConfig& cfg = {});
double perfect_resolution_spectrum(const GeneratorMatrix& g,
                                   const BlochVector& q0, double nu,
                                   double horizon, const PropagatorTable& table,
                                   const NumericsConfig& cfg = {});

// Batch evaluation of ew_spectrum over a rectangular (nu, t) grid. Grid
// points are independent; with threads > 1 they are evaluated in parallel
// with results identical to the sequential order. Convergence failures are
// rethrown with the offending grid coordinates attached.
SpectrumGrid spectrum_grid(const GeneratorMatrix& g, const BlochVector& q0,
                           const std::vector<double>& nus,
                           const std::vector<double>& times, double bandwidth,
                           const NumericsConfig& cfg = {}, int threads = 1);

}  // namespace qbeats

#endif
