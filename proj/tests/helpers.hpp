#pragma once

#include <cstdlib>
#include <string>

#include "voltvar/grid_model.hpp"
#include "voltvar/io_util.hpp"

namespace voltvar::testing {

inline std::string data_dir() {
    const char* d = std::getenv("VOLTVAR_DATA");
    return d ? d : "data";
}

inline std::string cli_path() {
    const char* b = std::getenv("VOLTVAR_BIN");
    return b ? b : "";
}

inline NetworkCase load_feeder(const std::string& case_name, const std::string& device_name = "") {
    NetworkCase c = load_case_file(data_dir() + "/" + case_name);
    if (!device_name.empty()) {
        c.devices = load_device_file(data_dir() + "/" + device_name);
        validate_case(c);
    }
    return c;
}

// Two-bus feeder with one branch in p.u. on a 100 MVA base.
inline NetworkCase two_bus(double r_pu = 0.01, double x_pu = 0.01, double load_mw = 10.0,
                           double load_mvar = 0.0) {
    NetworkCase c;
    c.base_mva = 100.0;
    c.slack_bus = 1;
    c.buses.push_back({1, 0.0, 0.0, 0.95, 1.05});
    c.buses.push_back({2, load_mw, load_mvar, 0.95, 1.05});
    c.branches.push_back({1, 2, r_pu, x_pu});
    return c;
}

// Four-bus chain with a net 2 MW injection at the end bus and an SVC there.
// Uncontrolled, the end voltage rises above 1.05; absorbing reactive power
// restores feasibility at some extra loss. Impedances are p.u. on 100 MVA,
// sized like a weak rural feeder.
inline NetworkCase toy4() {
    NetworkCase c;
    c.base_mva = 100.0;
    c.slack_bus = 1;
    c.buses.push_back({1, 0.0, 0.0, 0.95, 1.05});
    c.buses.push_back({2, 0.25, 0.1, 0.95, 1.05});
    c.buses.push_back({3, 0.15, 0.08, 0.95, 1.05});
    c.buses.push_back({4, -2.5, 0.0, 0.95, 1.05});
    c.branches.push_back({1, 2, 0.9, 0.7});
    c.branches.push_back({2, 3, 1.1, 0.9});
    c.branches.push_back({3, 4, 1.3, 1.0});
    c.devices.push_back({DeviceKind::Svc, 4, 0.0, 0.0, -2.0, 2.0});
    validate_case(c);
    return c;
}

} // namespace voltvar::testing
