#include "oce/streaming_estimator.hpp"

#include <cmath>
#include <string>

#include "oce/errors.hpp"

namespace oce {

double StepSchedule::step(std::int64_t j) const {
    const double raw = scale / std::pow(static_cast<double>(j), exponent);
    return raw < max_step ? raw : max_step;
}

void StepSchedule::validate() const {
    if (!(scale > 0.0)) throw ScheduleError("step schedule: b must be > 0");
    if (!(exponent > 0.5 && exponent < 1.0)) {
        throw ScheduleError("step schedule: alpha must lie in (0.5, 1), got " +
                            std::to_string(exponent));
    }
    if (!(max_step > 0.0)) throw ScheduleError("step schedule: max_step must be > 0");
}

StreamState stream_init(double t0, const StepSchedule& schedule) {
    schedule.validate();
    StreamState state;
    state.schedule = schedule;
    state.iterate = t0;
    state.start = t0;
    return state;
}

void stream_step(StreamState& state, double x, const DisutilitySpec& spec) {
    // The pre-update iterate enters the running average.
    state.iterate_sum += state.iterate;
    const double gamma = state.schedule.step(state.count + 1);
    const double t = state.iterate - gamma * (1.0 - phi_prime(spec, x - state.iterate));
    if (!std::isfinite(t)) {
        throw DivergenceError("stream_step: iterate left the finite range at step " +
                              std::to_string(state.count + 1) +
                              "; consider StepSchedule::max_step");
    }
    state.iterate = t;
    state.count += 1;
    state.samples.push_back(x);
}

double averaged_iterate(const StreamState& state) {
    if (state.count == 0) throw EmptyStreamError("averaged_iterate: no samples consumed");
    return state.iterate_sum / static_cast<double>(state.count);
}

double finalize_oce(const StreamState& state, const DisutilitySpec& spec) {
    if (state.count == 0) throw EmptyStreamError("finalize_oce: no samples consumed");
    const double tbar = averaged_iterate(state);
    double acc = 0.0;
    for (double x : state.samples) acc += phi(spec, x - tbar);
    return tbar + acc / static_cast<double>(state.count);
}

} // namespace oce
