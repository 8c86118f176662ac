#include "speca/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace speca {

using ordered_json = nlohmann::ordered_json;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("short write: " + path);
}

std::string steps_jsonl(const Trajectory& traj, int sample) {
    std::ostringstream out;
    for (const auto& s : traj.steps) {
        ordered_json j;
        if (sample >= 0) j["sample"] = sample;
        j["t"] = s.t;
        j["kind"] = to_string(s.kind);
        j["e_k"] = std::isfinite(s.e_k) ? s.e_k : 0.0;
        j["tau_t"] = std::isfinite(s.tau_t) ? s.tau_t : -1.0;
        j["accepted"] = s.kind != StepKind::RejectedFull;
        j["flops"] = s.flops;
        out << j.dump() << "\n";
    }
    return out.str();
}

std::string run_report_json(const RunConfig& cfg, const std::string& tag,
                            const std::vector<CostLedger>& ledgers,
                            double energy_distance_value) {
    double alpha = 0, gamma = 0, st = 0, sm = 0, lb = 0, total = 0;
    int t_full = 0, t_spec = 0, n_rej = 0;
    for (const auto& led : ledgers) {
        Speedup sp = speedup(led);
        alpha += led.accept_rate();
        gamma += led.verify_ratio();
        st += sp.theoretical;
        sm += sp.measured;
        lb += sp.lower_bound;
        total += led.total;
        t_full += led.T_full;
        t_spec += led.T_spec;
        n_rej += led.n_rejected;
    }
    double n = static_cast<double>(ledgers.size());
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["tag"] = tag;
    j["config"] = ordered_json::parse(emit_config(cfg));
    j["n_runs"] = ledgers.size();
    j["alpha"] = alpha / n;
    j["gamma"] = gamma / n;
    j["S_theoretical"] = st / n;
    j["S_measured"] = sm / n;
    j["S_lower_bound"] = lb / n;
    j["total_flops"] = total;
    j["T_full_total"] = t_full;
    j["T_spec_total"] = t_spec;
    j["n_rejected_total"] = n_rej;
    j["energy_distance"] = energy_distance_value;
    j["step_log"] = "steps.jsonl";
    return j.dump(2) + "\n";
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "tag,alpha,gamma,S_theoretical,S_measured,total_flops,energy_distance\n";
    out.precision(12);
    for (const auto& r : rows)
        out << r.tag << ',' << r.alpha << ',' << r.gamma << ',' << r.s_theoretical
            << ',' << r.s_measured << ',' << r.total_flops << ',' << r.energy_distance
            << "\n";
    return out.str();
}

std::map<int, int> allocation_histogram(const std::vector<CostLedger>& ledgers) {
    std::map<int, int> hist;
    for (const auto& led : ledgers) hist[led.T_full] += 1;
    return hist;
}

std::string allocation_csv(const std::map<int, int>& hist) {
    std::ostringstream out;
    out << "T_full,count\n";
    for (const auto& [k, v] : hist) out << k << ',' << v << "\n";
    return out.str();
}

std::string loss_csv(const LossCurve& curve) {
    std::ostringstream out;
    out << "iteration,loss\n";
    out.precision(12);
    for (std::size_t i = 0; i < curve.losses.size(); ++i)
        out << (i + 1) << ',' << curve.losses[i] << "\n";
    return out.str();
}

std::string ablation_csv(const AblationGrid& grid) {
    std::ostringstream out;
    out << to_string(grid.axis)
        << ",avg_total_flops,avg_speedup,avg_accept_rate,energy_distance,seeds\n";
    out.precision(12);
    for (const auto& c : grid.cells) {
        out << c.value << ',' << c.avg_total_flops << ',' << c.avg_speedup << ','
            << c.avg_accept_rate << ',' << c.energy << ',';
        for (std::size_t i = 0; i < c.seeds.size(); ++i)
            out << (i ? ";" : "") << c.seeds[i];
        out << "\n";
    }
    return out.str();
}

std::string correlation_csv(const CorrelationTable& table) {
    std::ostringstream out;
    out << "layer,r,samples\n";
    out.precision(12);
    for (std::size_t l = 0; l < table.layer_r.size(); ++l) {
        out << l << ',';
        if (table.layer_r[l])
            out << *table.layer_r[l];
        else
            out << "absent";
        out << ',' << table.sample_count << "\n";
    }
    return out.str();
}

std::string pca_csv(const std::vector<std::pair<double, double>>& points,
                    const std::vector<int>& timesteps) {
    if (points.size() != timesteps.size())
        throw std::invalid_argument("pca_csv: size mismatch");
    std::ostringstream out;
    out << "t,pc1,pc2\n";
    out.precision(12);
    for (std::size_t i = 0; i < points.size(); ++i)
        out << timesteps[i] << ',' << points[i].first << ',' << points[i].second << "\n";
    return out.str();
}

std::string svg_scatter(const std::vector<std::pair<double, double>>& points,
                        const std::string& title, bool connect) {
    const double W = 640, H = 480, pad = 48;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!points.empty()) {
        xmin = xmax = points[0].first;
        ymin = ymax = points[0].second;
        for (const auto& p : points) {
            xmin = std::min(xmin, p.first);
            xmax = std::max(xmax, p.first);
            ymin = std::min(ymin, p.second);
            ymax = std::max(ymax, p.second);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
    auto sy = [&](double y) { return H - pad - (y - ymin) / (ymax - ymin) * (H - 2 * pad); };

    std::ostringstream out;
    out.precision(8);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    if (connect && points.size() > 1) {
        out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : points) out << sx(p.first) << ',' << sy(p.second) << ' ';
        out << "\"/>\n";
    }
    for (const auto& p : points)
        out << "<circle cx=\"" << sx(p.first) << "\" cy=\"" << sy(p.second)
            << "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace speca
