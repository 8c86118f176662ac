#pragma once

#include <map>
#include <string>
#include <vector>

#include "speca/analysis.hpp"
#include "speca/config.hpp"
#include "speca/engine.hpp"

namespace speca {

/// Per-run summary row for summary.csv.
struct SummaryRow {
    std::string tag;
    double alpha = 0;
    double gamma = 0;
    double s_theoretical = 1;
    double s_measured = 1;
    double total_flops = 0;
    double energy_distance = 0;
};

void write_text_file(const std::string& path, const std::string& content);

std::string steps_jsonl(const Trajectory& traj, int sample = -1);

/// Single JSON document per run: config echo, ledger aggregates, speedups.
std::string run_report_json(const RunConfig& cfg, const std::string& tag,
                            const std::vector<CostLedger>& ledgers,
                            double energy_distance_value);

std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Histogram of per-sample full-computation counts (sample-adaptive allocation).
std::map<int, int> allocation_histogram(const std::vector<CostLedger>& ledgers);
std::string allocation_csv(const std::map<int, int>& hist);

std::string loss_csv(const LossCurve& curve);

std::string ablation_csv(const AblationGrid& grid);

std::string correlation_csv(const CorrelationTable& table);

std::string pca_csv(const std::vector<std::pair<double, double>>& points,
                    const std::vector<int>& timesteps);

/// Minimal line/scatter SVG used for the optional plot outputs.
std::string svg_scatter(const std::vector<std::pair<double, double>>& points,
                        const std::string& title, bool connect = false);

}  // namespace speca
