#include "voltvar/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace voltvar {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Strips `#` comments, returns trimmed payload.
std::string strip_comment(const std::string& line) {
    size_t h = line.find('#');
    return trim(h == std::string::npos ? line : line.substr(0, h));
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

double parse_num(const std::string& tok, int line_no, const char* what) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != tok.size())
        throw CaseError("line " + std::to_string(line_no) + ": bad " + what + " value '" + tok + "'");
    return v;
}

int parse_int(const std::string& tok, int line_no, const char* what) {
    double v = parse_num(tok, line_no, what);
    int i = static_cast<int>(std::lround(v));
    if (std::abs(v - i) > 1e-9)
        throw CaseError("line " + std::to_string(line_no) + ": " + what + " must be an integer, got '" + tok + "'");
    return i;
}

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

int NetworkCase::n_iber() const {
    int n = 0;
    for (const auto& d : devices)
        if (d.kind == DeviceKind::Iber) ++n;
    return n;
}

int NetworkCase::bus_index(int id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

NetworkCase parse_case(const std::string& text, std::vector<std::string>* warnings) {
    NetworkCase c;
    c.base_mva = 0.0;
    bool saw_base = false, saw_slack = false;

    enum class Section { None, Bus, Branch } section = Section::None;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    bool ohm_branches = false;
    int extra_bus_cols = 0, extra_branch_cols = 0;

    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = strip_comment(raw);
        if (line.empty()) continue;
        auto tok = tokens(line);

        if (tok[0] == "baseMVA") {
            if (tok.size() < 2)
                throw CaseError("line " + std::to_string(line_no) + ": baseMVA needs a value");
            c.base_mva = parse_num(tok[1], line_no, "baseMVA");
            if (tok.size() >= 3) c.base_kv = parse_num(tok[2], line_no, "base kV");
            saw_base = true;
            section = Section::None;
            continue;
        }
        if (tok[0] == "bus") {
            section = Section::Bus;
            continue;
        }
        if (tok[0] == "branch") {
            section = Section::Branch;
            continue;
        }

        switch (section) {
        case Section::Bus: {
            if (tok.size() < 4)
                throw CaseError("line " + std::to_string(line_no) + ": bus row needs [id type Pd Qd]");
            Bus b;
            b.id = parse_int(tok[0], line_no, "bus id");
            int type = parse_int(tok[1], line_no, "bus type");
            b.load_p_mw = parse_num(tok[2], line_no, "Pd");
            b.load_q_mvar = parse_num(tok[3], line_no, "Qd");
            if (tok.size() > 4) extra_bus_cols = static_cast<int>(tok.size()) - 4;
            if (type == 3) {
                if (saw_slack)
                    throw CaseError("line " + std::to_string(line_no) + ": second slack bus " + tok[0]);
                c.slack_bus = b.id;
                saw_slack = true;
            } else if (type != 1) {
                throw CaseError("line " + std::to_string(line_no) + ": unsupported bus type " + tok[1]);
            }
            for (const auto& prev : c.buses)
                if (prev.id == b.id)
                    throw CaseError("line " + std::to_string(line_no) + ": duplicate bus id " + tok[0]);
            c.buses.push_back(b);
            break;
        }
        case Section::Branch: {
            if (tok.size() < 5)
                throw CaseError("line " + std::to_string(line_no) + ": branch row needs [from to r x unit]");
            Branch br;
            br.from = parse_int(tok[0], line_no, "from bus");
            br.to = parse_int(tok[1], line_no, "to bus");
            br.r = parse_num(tok[2], line_no, "r");
            br.x = parse_num(tok[3], line_no, "x");
            int unit = parse_int(tok[4], line_no, "unit flag");
            if (tok.size() > 5) extra_branch_cols = static_cast<int>(tok.size()) - 5;
            if (unit == 1) {
                ohm_branches = true;
                if (c.base_kv <= 0.0)
                    throw CaseError("line " + std::to_string(line_no) +
                                    ": ohm impedances require a base kV on the baseMVA line");
                if (c.base_mva <= 0.0)
                    throw CaseError("line " + std::to_string(line_no) + ": ohm impedances require baseMVA first");
                double z_base = c.base_kv * c.base_kv / c.base_mva;
                br.r /= z_base;
                br.x /= z_base;
            } else if (unit != 0) {
                throw CaseError("line " + std::to_string(line_no) + ": unit flag must be 0 (p.u.) or 1 (ohm)");
            }
            c.branches.push_back(br);
            break;
        }
        case Section::None:
            throw CaseError("line " + std::to_string(line_no) + ": data outside of a bus/branch block");
        }
    }

    if (!saw_base) throw CaseError("missing baseMVA block");
    if (!saw_slack) throw CaseError("missing slack bus (type 3)");
    if (warnings) {
        if (extra_bus_cols)
            warnings->push_back("ignored " + std::to_string(extra_bus_cols) + " extra bus column(s)");
        if (extra_branch_cols)
            warnings->push_back("ignored " + std::to_string(extra_branch_cols) + " extra branch column(s)");
        if (ohm_branches)
            warnings->push_back("converted ohm impedances to p.u. on base " + fmt_num(c.base_mva) + " MVA");
    }

    validate_case(c);
    return c;
}

std::string serialize_case(const NetworkCase& c) {
    std::ostringstream os;
    os << "baseMVA " << fmt_num(c.base_mva);
    if (c.base_kv > 0.0) os << " " << fmt_num(c.base_kv);
    os << "\nbus\n";
    for (const auto& b : c.buses)
        os << b.id << " " << (b.id == c.slack_bus ? 3 : 1) << " " << fmt_num(b.load_p_mw) << " "
           << fmt_num(b.load_q_mvar) << "\n";
    os << "branch\n";
    for (const auto& br : c.branches)
        os << br.from << " " << br.to << " " << fmt_num(br.r) << " " << fmt_num(br.x) << " 0\n";
    return os.str();
}

std::vector<DeviceSpec> parse_devices(const std::string& text) {
    std::vector<DeviceSpec> out;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = strip_comment(raw);
        if (line.empty()) continue;
        auto tok = tokens(line);
        if (tok[0] == "IBER") {
            if (tok.size() != 4)
                throw CaseError("line " + std::to_string(line_no) + ": IBER needs <bus> <s_mva> <pmax_mw>");
            DeviceSpec d;
            d.kind = DeviceKind::Iber;
            d.bus = parse_int(tok[1], line_no, "device bus");
            d.s_rating_mva = parse_num(tok[2], line_no, "s_rating");
            d.p_max_mw = parse_num(tok[3], line_no, "p_max");
            if (d.p_max_mw < 0.0 || d.p_max_mw > d.s_rating_mva)
                throw CaseError("line " + std::to_string(line_no) + ": IBER requires 0 <= p_max <= s_rating");
            out.push_back(d);
        } else if (tok[0] == "SVC") {
            if (tok.size() != 4)
                throw CaseError("line " + std::to_string(line_no) + ": SVC needs <bus> <qmin> <qmax>");
            DeviceSpec d;
            d.kind = DeviceKind::Svc;
            d.bus = parse_int(tok[1], line_no, "device bus");
            d.q_min_mvar = parse_num(tok[2], line_no, "q_min");
            d.q_max_mvar = parse_num(tok[3], line_no, "q_max");
            if (d.q_min_mvar > d.q_max_mvar)
                throw CaseError("line " + std::to_string(line_no) + ": SVC requires q_min <= q_max");
            out.push_back(d);
        } else {
            throw CaseError("line " + std::to_string(line_no) + ": unknown device kind '" + tok[0] + "'");
        }
    }
    return out;
}

std::string serialize_devices(const std::vector<DeviceSpec>& devices) {
    std::ostringstream os;
    for (const auto& d : devices) {
        if (d.kind == DeviceKind::Iber)
            os << "IBER " << d.bus << " " << fmt_num(d.s_rating_mva) << " " << fmt_num(d.p_max_mw) << "\n";
        else
            os << "SVC " << d.bus << " " << fmt_num(d.q_min_mvar) << " " << fmt_num(d.q_max_mvar) << "\n";
    }
    return os.str();
}

void validate_case(const NetworkCase& c) {
    if (c.base_mva <= 0.0) throw CaseError("base_mva must be positive");
    if (c.buses.empty()) throw CaseError("case has no buses");
    if (c.bus_index(c.slack_bus) < 0) throw CaseError("slack bus id " + std::to_string(c.slack_bus) + " not found");

    std::unordered_set<int> ids;
    for (const auto& b : c.buses) {
        if (!ids.insert(b.id).second) throw CaseError("duplicate bus id " + std::to_string(b.id));
        if (!(b.v_min < b.v_max))
            throw CaseError("bus " + std::to_string(b.id) + ": requires v_min < v_max");
    }
    for (const auto& br : c.branches) {
        if (!ids.count(br.from))
            throw CaseError("branch references unknown bus " + std::to_string(br.from));
        if (!ids.count(br.to))
            throw CaseError("branch references unknown bus " + std::to_string(br.to));
        if (br.r < 0.0 || br.x < 0.0)
            throw CaseError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                            ": negative impedance");
        if (br.r == 0.0 && br.x == 0.0)
            throw CaseError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                            ": r and x both zero");
    }
    if (c.n_branch() != c.n_bus() - 1)
        throw NotRadialError("radial feeder needs exactly n_bus-1 branches, got " +
                             std::to_string(c.n_branch()) + " for " + std::to_string(c.n_bus()) + " buses");
    radial_order(c); // throws NotRadial on cycles / disconnected buses

    for (const auto& d : c.devices) {
        if (!ids.count(d.bus)) throw CaseError("device references unknown bus " + std::to_string(d.bus));
        if (d.kind == DeviceKind::Iber) {
            if (d.p_max_mw < 0.0 || d.p_max_mw > d.s_rating_mva)
                throw CaseError("IBER at bus " + std::to_string(d.bus) + ": requires 0 <= p_max <= s_rating");
        } else if (d.q_min_mvar > d.q_max_mvar) {
            throw CaseError("SVC at bus " + std::to_string(d.bus) + ": requires q_min <= q_max");
        }
    }
}

TraversalOrder radial_order(const NetworkCase& c) {
    const int n = c.n_bus();
    std::unordered_map<int, int> index;
    for (int i = 0; i < n; ++i) index[c.buses[i].id] = i;

    std::vector<std::vector<std::pair<int, int>>> adj(n); // (neighbor index, branch index)
    for (int bi = 0; bi < c.n_branch(); ++bi) {
        auto fi = index.find(c.branches[bi].from);
        auto ti = index.find(c.branches[bi].to);
        if (fi == index.end() || ti == index.end())
            throw CaseError("branch references unknown bus");
        adj[fi->second].push_back({ti->second, bi});
        adj[ti->second].push_back({fi->second, bi});
    }

    int root = c.slack_index();
    if (root < 0) throw CaseError("slack bus not found");

    TraversalOrder t;
    t.parent.assign(n, -1);
    t.parent_branch.assign(n, -1);
    std::vector<char> seen(n, 0);
    std::deque<int> queue{root};
    seen[root] = 1;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        t.order.push_back(u);
        for (auto [v, bi] : adj[u]) {
            if (bi == t.parent_branch[u]) continue;
            if (seen[v])
                throw NotRadialError("cycle detected through bus " + std::to_string(c.buses[v].id));
            seen[v] = 1;
            t.parent[v] = u;
            t.parent_branch[v] = bi;
            queue.push_back(v);
        }
    }
    if (static_cast<int>(t.order.size()) != n) {
        for (int i = 0; i < n; ++i)
            if (!seen[i])
                throw NotRadialError("bus " + std::to_string(c.buses[i].id) + " is not connected to the slack");
    }
    return t;
}

std::pair<double, double> qg_bounds(const DeviceSpec& d, double p_now_mw) {
    if (d.kind == DeviceKind::Svc) return {d.q_min_mvar, d.q_max_mvar};
    (void)p_now_mw; // capability uses the rated active-power bound, not the instantaneous output
    double head = d.s_rating_mva * d.s_rating_mva - d.p_max_mw * d.p_max_mw;
    double q = head > 0.0 ? std::sqrt(head) : 0.0;
    return {-q, q};
}

namespace {
std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CaseError("cannot open file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}
} // namespace

NetworkCase load_case_file(const std::string& path, std::vector<std::string>* warnings) {
    return parse_case(read_file(path), warnings);
}

std::vector<DeviceSpec> load_device_file(const std::string& path) {
    return parse_devices(read_file(path));
}

} // namespace voltvar
