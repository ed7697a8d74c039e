#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "voltvar/grid_model.hpp"

namespace voltvar {

/// 15-minute resolution: 96 samples per day.
inline constexpr int kStepsPerDay = 96;

/// One day of exogenous data: per-bus load multipliers applied to the
/// nominal loads, and available active power per IB-ER.
struct DayProfile {
    Eigen::MatrixXd load_mult; // kStepsPerDay x n_bus
    Eigen::MatrixXd gen_p_mw;  // kStepsPerDay x n_iber
};

/// Throws std::invalid_argument on shape problems or gen power above the
/// device's p_max.
void validate_profile(const DayProfile& p, const NetworkCase& c);

struct SyntheticProfileParams {
    double mult_min = 0.4;
    double mult_max = 1.3;
    double mult_base = 0.62;       // overnight level of the diurnal curve
    double evening_peak = 0.52;    // added around 19:00
    double morning_bump = 0.18;    // added around 09:00
    double bus_noise = 0.04;       // per-bus smooth noise amplitude
    double day_scale_noise = 0.06; // per-day overall level spread
    double solar_noon = 12.5;      // hours
    double solar_width = 3.1;      // hours
    double cloud_noise = 0.12;
};

/// Deterministic in `seed`. Load multipliers follow a diurnal curve (low
/// overnight, peak in the early evening) with smooth per-bus noise; IB-ER
/// availability follows a solar bell curve with cloud noise, clipped to
/// [0, p_max].
std::vector<DayProfile> generate_synthetic_profiles(std::uint64_t seed, int n_days, const NetworkCase& c,
                                                    const SyntheticProfileParams& params = {});

/// CSV round-trip. Writes loads_<day>.csv (`step,bus_1,...,bus_N`) and
/// gen_<day>.csv (`step,der_1,...,der_k`) under `dir`.
void write_profile_csv(const std::string& dir, int day, const DayProfile& p, const NetworkCase& c);
DayProfile read_profile_csv(const std::string& dir, int day, const NetworkCase& c);

} // namespace voltvar
