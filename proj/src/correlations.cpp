#include "qbeats/correlations.hpp"

#include <cmath>
#include <stdexcept>

namespace qbeats {

TwoTimeInitial two_time_initials(const GeneratorMatrix& g,
                                 const BlochVector& q0, double t1) {
  if (t1 < 0.0) {
    throw std::invalid_argument("two_time_initials: negative t1");
  }
  const BlochVector q1 = propagate(g, q0, t1);
  TwoTimeInitial init;
  init.t1 = t1;
  init.u0[kA31] = q1.q[kA11];
  init.u0[kA33] = q1.q[kA13];
  init.v0[kA42] = q1.q[kA22];
  init.v0[kA44] = q1.q[kA24];
  return init;
}

CorrelationKernel dipole_correlation(const GeneratorMatrix& g,
                                     const BlochVector& q0, double t1,
                                     double tau) {
  const TwoTimeInitial init = two_time_initials(g, q0, t1);
  const Mat8 e = matrix_exp(g, tau);
  CorrelationKernel k;
  k.t1 = t1;
  k.tau = tau;
  k.g13 = e(kA31, kA31) * init.u0[kA31] + e(kA31, kA33) * init.u0[kA33];
  k.g24 = e(kA42, kA42) * init.v0[kA42] + e(kA42, kA44) * init.v0[kA44];
  k.g = k.g13 + k.g24;
  return k;
}

CorrelationKernel se_correlation_analytic(double gamma, double delta,
                                          double t1, double tau) {
  if (t1 < 0.0 || tau < 0.0) {
    throw std::invalid_argument("se_correlation_analytic: negative time");
  }
  const double envelope = 0.5 * std::exp(-gamma * t1);
  CorrelationKernel k;
  k.t1 = t1;
  k.tau = tau;
  k.g13 = envelope * std::exp(-gamma * tau / 2.0);
  k.g24 = envelope * std::exp(Complex(-gamma / 2.0, -delta) * tau);
  k.g = k.g13 + k.g24;
  return k;
}

}  // namespace qbeats
