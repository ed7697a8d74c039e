#include "voltvar/metrics.hpp"

#include <sstream>
#include <stdexcept>

#include "voltvar/io_util.hpp"

namespace voltvar {

int CsvTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::string csv_serialize(const CsvTable& t) {
    std::ostringstream os;
    for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw std::invalid_argument("csv row width mismatch");
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << "\n";
    }
    return os.str();
}

CsvTable csv_parse(const std::string& text) {
    CsvTable t;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.empty()) throw std::runtime_error("csv: missing header");
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            size_t pos = 0;
            double v = std::stod(cell, &pos);
            if (pos != cell.size()) throw std::runtime_error("csv: bad numeric cell '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != t.columns.size())
            throw std::runtime_error("csv: row width " + std::to_string(row.size()) + " != header width " +
                                     std::to_string(t.columns.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable metrics_table(const std::vector<EpisodeMetrics>& eps, bool with_agent_rows) {
    CsvTable t;
    if (!with_agent_rows) {
        t.columns = {"episode",      "mean_loss_mw", "mean_cost_pu",     "alpha",
                     "lambda",       "critic_loss",  "cost_critic_loss", "entropy_estimate"};
        for (const auto& m : eps)
            t.rows.push_back({static_cast<double>(m.episode), m.mean_loss_mw, m.mean_cost_pu, m.alpha,
                              m.lambda, m.critic_loss, m.cost_critic_loss, m.entropy_estimate});
        return t;
    }
    t.columns = {"episode",      "agent_id",    "mean_loss_mw",     "mean_cost_pu",    "alpha",
                 "lambda",       "critic_loss", "cost_critic_loss", "entropy_estimate"};
    for (const auto& m : eps)
        for (size_t k = 0; k < m.agent_entropy.size(); ++k)
            t.rows.push_back({static_cast<double>(m.episode), static_cast<double>(k), m.mean_loss_mw,
                              m.mean_cost_pu, m.alpha, m.lambda, m.critic_loss, m.cost_critic_loss,
                              m.agent_entropy[k]});
    return t;
}

CsvTable csv_mean(const std::vector<CsvTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("csv_mean of nothing");
    CsvTable out = tables.front();
    for (size_t k = 1; k < tables.size(); ++k) {
        const CsvTable& t = tables[k];
        if (t.columns != out.columns || t.rows.size() != out.rows.size())
            throw std::invalid_argument("csv_mean: shape mismatch between tables");
        for (size_t r = 0; r < t.rows.size(); ++r)
            for (size_t c = 0; c < t.rows[r].size(); ++c) out.rows[r][c] += t.rows[r][c];
    }
    const double inv = 1.0 / static_cast<double>(tables.size());
    for (auto& row : out.rows)
        for (auto& v : row) v *= inv;
    return out;
}

} // namespace voltvar
