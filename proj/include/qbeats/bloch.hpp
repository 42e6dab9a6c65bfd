#ifndef QBEATS_BLOCH_HPP
#define QBEATS_BLOCH_HPP

#include <complex>

#include <Eigen/Dense>

#include "qbeats/params.hpp"

namespace qbeats {

using Complex = std::complex<double>;
using Mat8 = Eigen::Matrix<Complex, 8, 8>;
using Vec8 = Eigen::Matrix<Complex, 8, 1>;

// Component indices of the Bloch vector, in the fixed ordering
// (A11, A13, A22, A24, A31, A33, A42, A44) with A_jk = |j><k|.
enum BlochComp : int {
  kA11 = 0,
  kA13 = 1,
  kA22 = 2,
  kA24 = 3,
  kA31 = 4,
  kA33 = 5,
  kA42 = 6,
  kA44 = 7,
};

// The 8 expectation values (populations and pi-transition coherences) that
// close under the master equation.
struct BlochVector {
  Vec8 q = Vec8::Zero();

  double population_sum() const {
    return (q[kA11] + q[kA22] + q[kA33] + q[kA44]).real();
  }
};

// Fully excited superposition (1/2, 0, 1/2, 0, 0, 0, 0, 0): the spontaneous
// emission initial state with both upper populations equal.
BlochVector excited_superposition();

// Ground superposition (0, 0, 0, 0, 0, 1/2, 0, 1/2): the resonance
// fluorescence initial state with both lower populations equal.
BlochVector ground_superposition();

// Coefficient matrix M of the homogeneous Bloch system dq/dt = M q,
// in the fixed component ordering above. Immutable after construction.
struct GeneratorMatrix {
  Mat8 m = Mat8::Zero();
  SystemParams params;
};

// Transcribes the eight Bloch equations into M. Total on valid params.
GeneratorMatrix build_generator(const SystemParams& params);

// e^{M t} for t >= 0, by Pade scaling-and-squaring. Rejects t < 0 with
// std::invalid_argument (backward propagation is not defined for the
// dissipative system).
Mat8 matrix_exp(const GeneratorMatrix& g, double t);

// e^{M t} q0 for a normalized initial state (population sum 1).
BlochVector propagate(const GeneratorMatrix& g, const BlochVector& q0,
                      double t);

// The unique stationary vector with M v = 0, normalized to population sum 1.
// Throws DegenerateSteadyState when the kernel of M has dimension > 1
// (always at Omega = 0).
BlochVector steady_state(const GeneratorMatrix& g,
                         const NumericsConfig& cfg = {});

// Total pi-transition intensity <A11> + <A22>; the imaginary residue of the
// populations (<= 1e-10 for physical states) is discarded.
double intensity(const BlochVector& q);

namespace detail {

// Matrix exponential of an arbitrary complex square matrix (Pade order 13
// with scaling and squaring). Shared by the propagation and spectra code.
Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a);

}  // namespace detail

}  // namespace qbeats

#endif
