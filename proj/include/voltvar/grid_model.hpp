#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace voltvar {

struct Bus {
    int id = 0;
    double load_p_mw = 0.0;
    double load_q_mvar = 0.0;
    double v_min = 0.95;
    double v_max = 1.05;
};

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0; // p.u. on system base
    double x = 0.0; // p.u. on system base
};

enum class DeviceKind { Iber, Svc };

/// Reactive-support device. IB-ERs carry an apparent-power rating and an
/// active-power upper bound; SVCs carry explicit reactive limits.
struct DeviceSpec {
    DeviceKind kind = DeviceKind::Svc;
    int bus = 0;
    double s_rating_mva = 0.0; // IBER
    double p_max_mw = 0.0;     // IBER
    double q_min_mvar = 0.0;   // SVC
    double q_max_mvar = 0.0;   // SVC
};

/// Immutable description of a radial feeder. Construct via parse_case /
/// attach_devices, then validate; safe to share across threads afterwards.
struct NetworkCase {
    double base_mva = 100.0;
    double base_kv = 0.0; // only needed when impedances arrive in ohms
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<DeviceSpec> devices;
    int slack_bus = 0; // bus id, not index

    int n_bus() const { return static_cast<int>(buses.size()); }
    int n_branch() const { return static_cast<int>(branches.size()); }
    int n_device() const { return static_cast<int>(devices.size()); }
    int n_iber() const;

    // Maps a bus id to its position in `buses`; -1 if unknown.
    int bus_index(int id) const;
    int slack_index() const { return bus_index(slack_bus); }
};

struct TraversalOrder {
    std::vector<int> order;         // bus indices, slack first, parents before children
    std::vector<int> parent;        // per bus index; -1 for the slack
    std::vector<int> parent_branch; // branch index feeding each bus; -1 for the slack
};

class CaseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotRadialError : public CaseError {
public:
    using CaseError::CaseError;
};

/// Parses the block-structured case text (`baseMVA`, `bus`, `branch`).
/// Recognized columns only; extra columns are skipped and reported through
/// `warnings` when given. Impedances with unit flag 1 are ohms and get
/// converted to p.u. on base_mva (requires a base kV on the baseMVA line).
NetworkCase parse_case(const std::string& text, std::vector<std::string>* warnings = nullptr);

std::string serialize_case(const NetworkCase& c);

/// One device per line: `IBER <bus> <s_mva> <pmax_mw>` or `SVC <bus> <qmin> <qmax>`.
std::vector<DeviceSpec> parse_devices(const std::string& text);
std::string serialize_devices(const std::vector<DeviceSpec>& devices);

/// Full structural validation: single slack, radial spanning tree, sane
/// impedances and limits, device references. Throws CaseError/NotRadialError.
void validate_case(const NetworkCase& c);

/// Breadth-first parent ordering rooted at the slack. Detects cycles and
/// disconnected buses on its own, so it also works on unvalidated cases.
TraversalOrder radial_order(const NetworkCase& c);

/// Reactive capability of one device. IBER limits are symmetric,
/// +-sqrt(s_rating^2 - p_max^2), independent of the instantaneous output;
/// SVC limits are returned verbatim. `p_now_mw` is clamped into [0, s_rating].
std::pair<double, double> qg_bounds(const DeviceSpec& d, double p_now_mw);

NetworkCase load_case_file(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::vector<DeviceSpec> load_device_file(const std::string& path);

} // namespace voltvar
