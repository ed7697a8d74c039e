#pragma once

#include <string>
#include <vector>

#include "voltvar/alsac.hpp"

namespace voltvar {

/// Plain numeric CSV with a header row.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const; // -1 when missing
};

std::string csv_serialize(const CsvTable& t);
CsvTable csv_parse(const std::string& text);

/// `episode,mean_loss_mw,mean_cost_pu,alpha,lambda,critic_loss,
/// cost_critic_loss,entropy_estimate`; with_agent_rows additionally emits
/// one row per (episode, agent) with a leading agent_id column after
/// episode.
CsvTable metrics_table(const std::vector<EpisodeMetrics>& eps, bool with_agent_rows = false);

/// Arithmetic per-cell mean of identically shaped tables.
CsvTable csv_mean(const std::vector<CsvTable>& tables);

} // namespace voltvar
