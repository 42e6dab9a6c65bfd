#ifndef QBEATS_CORRELATIONS_HPP
#define QBEATS_CORRELATIONS_HPP

#include "qbeats/bloch.hpp"

namespace qbeats {

// Initial conditions (at tau = 0) of the two-time vectors
// U(t1, tau) = A13(t1) Q(t1+tau) and V(t1, tau) = A24(t1) Q(t1+tau).
// u0 is zero except A31 <- <A11(t1)> and A33 <- <A13(t1)>;
// v0 is zero except A42 <- <A22(t1)> and A44 <- <A24(t1)>.
struct TwoTimeInitial {
  Vec8 u0 = Vec8::Zero();
  Vec8 v0 = Vec8::Zero();
  double t1 = 0.0;
};

// Two-time dipole correlation G(t1, tau) and its two summands.
struct CorrelationKernel {
  Complex g;    // g13 + g24
  Complex g13;  // <A13(t1) A31(t1+tau)>
  Complex g24;  // <A24(t1) A42(t1+tau)>
  double t1 = 0.0;
  double tau = 0.0;
};

// Fills the U/V initial conditions from the one-time solution at t1.
TwoTimeInitial two_time_initials(const GeneratorMatrix& g,
                                 const BlochVector& q0, double t1);

// Quantum regression in the delay: the correlations follow the same Bloch
// generator in tau, seeded by the U/V initial conditions. In the fixed
// ordering, g13 = [e^{M tau}](A31,A31) <A11(t1)> + [e^{M tau}](A31,A33) <A13(t1)>
// and g24 = [e^{M tau}](A42,A42) <A22(t1)> + [e^{M tau}](A42,A44) <A24(t1)>.
CorrelationKernel dipole_correlation(const GeneratorMatrix& g,
                                     const BlochVector& q0, double t1,
                                     double tau);

// Closed form for spontaneous emission (Omega = Delta = 0, excited
// superposition): g13 = e^{-gamma tau/2} e^{-gamma t1} / 2 and
// g24 = e^{-(gamma/2 + i delta) tau} e^{-gamma t1} / 2.
CorrelationKernel se_correlation_analytic(double gamma, double delta,
                                          double t1, double tau);

}  // namespace qbeats

#endif
