#include "voltvar/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "voltvar/io_util.hpp"

namespace voltvar {

void validate_profile(const DayProfile& p, const NetworkCase& c) {
    if (p.load_mult.rows() != kStepsPerDay)
        throw std::invalid_argument("profile needs " + std::to_string(kStepsPerDay) + " rows, got " +
                                    std::to_string(p.load_mult.rows()));
    if (p.load_mult.cols() != c.n_bus())
        throw std::invalid_argument("profile load columns do not match bus count");
    const int n_iber = c.n_iber();
    if (p.gen_p_mw.rows() != kStepsPerDay || p.gen_p_mw.cols() != n_iber)
        throw std::invalid_argument("profile generation shape must be 96 x n_iber");
    int g = 0;
    for (const auto& d : c.devices) {
        if (d.kind != DeviceKind::Iber) continue;
        for (int t = 0; t < kStepsPerDay; ++t) {
            double v = p.gen_p_mw(t, g);
            if (v < -1e-12 || v > d.p_max_mw + 1e-9)
                throw std::invalid_argument("generation exceeds p_max for device at bus " + std::to_string(d.bus));
        }
        ++g;
    }
}

namespace {

double gauss_bump(double h, double center, double width) {
    double z = (h - center) / width;
    return std::exp(-z * z);
}

// Smooth zero-mean intraday wiggle from two random sinusoids.
struct Wiggle {
    double a1, p1, a2, p2;
    double at(double frac_of_day) const {
        return a1 * std::sin(2.0 * M_PI * frac_of_day + p1) + a2 * std::sin(4.0 * M_PI * frac_of_day + p2);
    }
};

Wiggle draw_wiggle(std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> amp(0.0, amplitude);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    Wiggle w;
    w.a1 = amp(rng);
    w.p1 = phase(rng);
    w.a2 = amp(rng);
    w.p2 = phase(rng);
    return w;
}

} // namespace

std::vector<DayProfile> generate_synthetic_profiles(std::uint64_t seed, int n_days, const NetworkCase& c,
                                                    const SyntheticProfileParams& prm) {
    if (n_days < 1) throw std::invalid_argument("n_days must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n_bus = c.n_bus();
    const int n_iber = c.n_iber();
    std::vector<double> iber_pmax;
    for (const auto& d : c.devices)
        if (d.kind == DeviceKind::Iber) iber_pmax.push_back(d.p_max_mw);

    std::vector<DayProfile> days;
    days.reserve(n_days);
    for (int d = 0; d < n_days; ++d) {
        DayProfile p;
        p.load_mult.resize(kStepsPerDay, n_bus);
        p.gen_p_mw.resize(kStepsPerDay, n_iber);

        double day_scale = 1.0 + prm.day_scale_noise * std::clamp(normal(rng), -2.5, 2.5);
        double day_clear = 0.65 + 0.35 * unit(rng); // overall irradiance level

        std::vector<Wiggle> bus_wiggle(n_bus);
        for (int b = 0; b < n_bus; ++b) bus_wiggle[b] = draw_wiggle(rng, prm.bus_noise);
        std::vector<Wiggle> cloud_wiggle(n_iber);
        for (int g = 0; g < n_iber; ++g) cloud_wiggle[g] = draw_wiggle(rng, prm.cloud_noise);

        for (int t = 0; t < kStepsPerDay; ++t) {
            double h = (t + 0.5) * 24.0 / kStepsPerDay;
            double frac = static_cast<double>(t) / kStepsPerDay;
            double diurnal = prm.mult_base + prm.evening_peak * gauss_bump(h, 19.0, 2.8) +
                             prm.morning_bump * gauss_bump(h, 9.0, 2.5);
            for (int b = 0; b < n_bus; ++b) {
                double m = day_scale * diurnal * (1.0 + bus_wiggle[b].at(frac));
                p.load_mult(t, b) = std::clamp(m, prm.mult_min, prm.mult_max);
            }
            double bell = gauss_bump(h, prm.solar_noon, prm.solar_width);
            if (bell < 0.02) bell = 0.0; // night
            for (int g = 0; g < n_iber; ++g) {
                double clear = std::clamp(day_clear * (1.0 + cloud_wiggle[g].at(frac)), 0.0, 1.0);
                p.gen_p_mw(t, g) = std::clamp(iber_pmax[g] * bell * clear, 0.0, iber_pmax[g]);
            }
        }
        validate_profile(p, c);
        days.push_back(std::move(p));
    }
    return days;
}

namespace {

std::string profile_csv(const Eigen::MatrixXd& m, const std::string& col_prefix) {
    std::ostringstream os;
    os << "step";
    for (int j = 0; j < m.cols(); ++j) os << "," << col_prefix << (j + 1);
    os << "\n";
    for (int t = 0; t < m.rows(); ++t) {
        os << t;
        for (int j = 0; j < m.cols(); ++j) os << "," << format_double(m(t, j));
        os << "\n";
    }
    return os.str();
}

Eigen::MatrixXd parse_profile_csv(const std::string& text, const std::string& col_prefix, int expect_cols,
                                  const std::string& what) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(what + ": empty file");
    // header check
    {
        std::ostringstream expect;
        expect << "step";
        for (int j = 0; j < expect_cols; ++j) expect << "," << col_prefix << (j + 1);
        if (line != expect.str())
            throw std::runtime_error(what + ": bad header, expected '" + expect.str() + "'");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != expect_cols + 1)
            throw std::runtime_error(what + ": row with " + std::to_string(row.size()) + " cells");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(rows.size(), expect_cols);
    for (size_t t = 0; t < rows.size(); ++t)
        for (int j = 0; j < expect_cols; ++j) m(t, j) = rows[t][j + 1];
    return m;
}

} // namespace

void write_profile_csv(const std::string& dir, int day, const DayProfile& p, const NetworkCase& c) {
    validate_profile(p, c);
    atomic_write_file(dir + "/loads_" + std::to_string(day) + ".csv", profile_csv(p.load_mult, "bus_"));
    atomic_write_file(dir + "/gen_" + std::to_string(day) + ".csv", profile_csv(p.gen_p_mw, "der_"));
}

DayProfile read_profile_csv(const std::string& dir, int day, const NetworkCase& c) {
    DayProfile p;
    p.load_mult = parse_profile_csv(read_text_file(dir + "/loads_" + std::to_string(day) + ".csv"), "bus_",
                                    c.n_bus(), "loads csv");
    p.gen_p_mw = parse_profile_csv(read_text_file(dir + "/gen_" + std::to_string(day) + ".csv"), "der_",
                                   c.n_iber(), "gen csv");
    validate_profile(p, c);
    return p;
}

} // namespace voltvar
