#ifndef OCE_STREAMING_ESTIMATOR_HPP
#define OCE_STREAMING_ESTIMATOR_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "oce/disutility.hpp"

namespace oce {

/// Decaying step size gamma_j = b / j^alpha with alpha in (0.5, 1),
/// optionally clipped at max_step. The clip is off by default; it exists
/// because large b makes the first updates expansive for smooth families
/// (|1 - gamma_j phi''| > 1 until gamma_j < 2/L), and clipping at 1/L
/// removes that transient while leaving every step with b/j^alpha <=
/// max_step untouched.
struct StepSchedule {
    double scale = 1.0;    // b > 0
    double exponent = 0.6; // alpha in (0.5, 1)
    double max_step = std::numeric_limits<double>::infinity();

    double step(std::int64_t j) const;
    void validate() const; // ScheduleError on bad parameters
};

/// One-sample-at-a-time minimizer tracking with iterate averaging:
///   t_j = t_{j-1} - gamma_j (1 - phi'(x_j - t_{j-1})),
/// the average runs over the pre-update iterates t_0..t_{m-1}, and the
/// sample buffer is retained for the two-pass risk finalization.
struct StreamState {
    StepSchedule schedule;
    double iterate = 0.0;     // t_j
    std::int64_t count = 0;   // j
    double iterate_sum = 0.0; // t_0 + ... + t_{j-1}
    double start = 0.0;       // t_0
    std::vector<double> samples;
};

StreamState stream_init(double t0, const StepSchedule& schedule);

/// Consumes one sample. Throws DivergenceError if the iterate leaves the
/// finite range (possible under large b; see StepSchedule::max_step).
void stream_step(StreamState& state, double x, const DisutilitySpec& spec);

/// Average of the pre-update iterates, sum(t_0..t_{m-1}) / m.
double averaged_iterate(const StreamState& state);

/// Two-pass risk estimate: tbar + (1/m) sum phi(x_i - tbar) over the
/// retained buffer, with tbar = averaged_iterate(state).
double finalize_oce(const StreamState& state, const DisutilitySpec& spec);

} // namespace oce

#endif
