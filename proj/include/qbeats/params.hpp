#ifndef QBEATS_PARAMS_HPP
#define QBEATS_PARAMS_HPP

namespace qbeats {

// Physical rates and detunings of the driven J=1/2 - J'=1/2 emitter.
// Everything is expressed in units of the total decay rate gamma, which is
// 1 by convention; all four excited-state decay channels follow from the
// 1/3 (pi) and 2/3 (sigma) branching ratios.
struct SystemParams {
  double rabi = 0.0;            // Omega, laser Rabi frequency (>= 0)
  double laser_detuning = 0.0;  // Delta = omega_L - omega_13
  double zeeman_diff = 0.0;     // delta, difference Zeeman splitting
  double gamma = 1.0;           // total decay rate of each excited state
  double gamma_pi = 1.0 / 3.0;  // pi-channel rate
  double gamma_sigma = 2.0 / 3.0;  // sigma-channel rate

  // Builds params from the branching ratios: gamma_pi = gamma/3,
  // gamma_sigma = 2*gamma/3.
  static SystemParams make(double rabi, double laser_detuning,
                           double zeeman_diff, double gamma = 1.0);

  // Throws std::invalid_argument if gamma <= 0, rabi < 0, or the channel
  // rates do not add up to gamma (1e-12 relative).
  void validate() const;
};

// Library-wide numerical tolerances. The defaults define the accuracy
// contracts of every operation; tests pin them.
struct NumericsConfig {
  double quad_rel_tol = 1e-5;      // outer-quadrature relative convergence
  double quad_abs_floor = 1e-12;   // absolute floor for near-zero spectra
  int max_quad_levels = 14;        // panel cap 2^max_quad_levels
  double kernel_rank_rtol = 1e-9;  // singular values below rtol*smax are zero
  double resolvent_cond_max = 1e12;  // guard before the resolvent shortcut
  double narrowing_switch_rtol = 1e-6;  // |gamma-Gamma| switch to sinc form
};

}  // namespace qbeats

#endif
