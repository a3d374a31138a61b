#include "hybridfv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hybridfv {

namespace {

void check_shapes(const Field& a, const Field& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("metrics: shape mismatch");
}

}  // namespace

double rel_l2(const Field& truth, const Field& pred) {
    check_shapes(truth, pred);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - pred[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (den == 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(num) / std::sqrt(den);
}

double mse(const Field& truth, const Field& pred) {
    check_shapes(truth, pred);
    double acc = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - pred[i];
        acc += d * d;
    }
    return acc / static_cast<double>(truth.size());
}

double mae(const Field& truth, const Field& pred) {
    check_shapes(truth, pred);
    double acc = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        acc += std::abs(truth[i] - pred[i]);
    return acc / static_cast<double>(truth.size());
}

double maxae(const Field& truth, const Field& pred) {
    check_shapes(truth, pred);
    double m = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        m = std::max(m, std::abs(truth[i] - pred[i]));
    return m;
}

VariableErrors field_errors(const Field& truth, const Field& pred) {
    return {rel_l2(truth, pred), mse(truth, pred), mae(truth, pred),
            maxae(truth, pred)};
}

Field velocity_magnitude(const StructuredGrid& g, const FieldState& s) {
    Field mag(g.cell_count(), 0.0);
    for (long c = 0; c < g.cell_count(); ++c) {
        double acc = 0;
        for (int a = 0; a < g.axes; ++a) acc += s.u[a][c] * s.u[a][c];
        mag[c] = std::sqrt(acc);
    }
    return mag;
}

std::vector<VariableErrors> ErrorSeries::time_average() const {
    std::vector<VariableErrors> avg(var_names.size());
    if (rows.empty()) return avg;
    std::vector<long> counts(var_names.size(), 0);
    for (const auto& row : rows)
        for (std::size_t v = 0; v < row.size(); ++v) {
            if (!std::isfinite(row[v].rel_l2)) continue;  // zero-norm sentinel
            avg[v].rel_l2 += row[v].rel_l2;
            avg[v].mse += row[v].mse;
            avg[v].mae += row[v].mae;
            avg[v].maxae += row[v].maxae;
            counts[v] += 1;
        }
    for (std::size_t v = 0; v < avg.size(); ++v)
        if (counts[v] > 0) {
            avg[v].rel_l2 /= counts[v];
            avg[v].mse /= counts[v];
            avg[v].mae /= counts[v];
            avg[v].maxae /= counts[v];
        }
    return avg;
}

ErrorSeries compare_trajectories(
    const StructuredGrid& g,
    const std::vector<std::pair<long, FieldState>>& truth,
    const std::vector<std::pair<long, FieldState>>& pred) {
    ErrorSeries series;
    series.var_names = {"T", "Umag", "ux", "uy"};
    if (g.axes == 3) series.var_names.push_back("uz");

    std::size_t ti = 0;
    for (const auto& [step, ps] : pred) {
        while (ti < truth.size() && truth[ti].first < step) ++ti;
        if (ti >= truth.size()) break;
        if (truth[ti].first != step) continue;
        const FieldState& ts = truth[ti].second;
        std::vector<VariableErrors> row;
        row.push_back(field_errors(ts.T, ps.T));
        row.push_back(field_errors(velocity_magnitude(g, ts),
                                   velocity_magnitude(g, ps)));
        for (int a = 0; a < g.axes; ++a)
            row.push_back(field_errors(ts.u[a], ps.u[a]));
        series.steps.push_back(step);
        series.times.push_back(ps.time);
        series.rows.push_back(std::move(row));
    }
    return series;
}

void write_error_series_csv(const ErrorSeries& series, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "step,time";
    for (const auto& v : series.var_names)
        os << ",rel_l2_" << v << ",mse_" << v << ",mae_" << v << ",maxae_" << v;
    os << "\n";
    os.precision(12);
    for (std::size_t r = 0; r < series.rows.size(); ++r) {
        os << series.steps[r] << "," << series.times[r];
        for (const auto& e : series.rows[r])
            os << "," << e.rel_l2 << "," << e.mse << "," << e.mae << "," << e.maxae;
        os << "\n";
    }
}

std::vector<SweepRow> benchmark_sweep(const CaseSetup& base,
                                      const std::vector<int>& epoch_grid,
                                      const std::vector<double>& threshold_grid,
                                      const std::string& pretrained_path) {
    // shared ground truth at the same cadence and seed
    std::vector<std::pair<long, FieldState>> truth;
    cfd_reference_run(base, base.hybrid.total_steps,
                      [&](long s, const FieldState& st) {
                          truth.emplace_back(s, st);
                      });

    std::vector<SweepRow> rows;
    for (int epochs : epoch_grid)
        for (double threshold : threshold_grid) {
            CaseSetup setup = base;
            setup.hybrid.tl_epochs = epochs;
            setup.hybrid.residual_threshold = threshold;
            std::vector<std::pair<long, FieldState>> traj;
            HybridRunResult run = hybrid_run(
                setup, pretrained_path,
                [&](long s, const FieldState& st) { traj.emplace_back(s, st); });
            const HybridLedger& lg = run.ledger;
            const long N = lg.completed_steps();

            SweepRow row;
            row.tl_epochs = epochs;
            row.residual_threshold = threshold;
            row.t_cfd = lg.t_cfd_mean();
            row.t_ml = lg.t_ml_mean();
            row.t_up = lg.t_up_mean();
            row.n_switch = lg.n_switch;
            row.n_cfd = lg.n_cfd;
            row.n_ml = lg.n_ml;
            row.cfd_total_s = static_cast<double>(N) * row.t_cfd;
            row.hybrid_total_s = lg.n_cfd * row.t_cfd + lg.n_ml * row.t_ml +
                                 lg.n_switch * row.t_up;
            row.psi = speedup_psi(lg, N);
            row.avg_steps_per_switch =
                lg.n_switch > 0 ? static_cast<double>(lg.n_ml) / lg.n_switch : 0.0;

            ErrorSeries series = compare_trajectories(base.grid, truth, traj);
            const auto avg = series.time_average();
            row.temp = avg[0];
            row.umag = avg[1];
            rows.push_back(row);
        }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "epochs,res,t_cfd,t_ml,t_up,n_switch,n_cfd,n_ml,"
          "cfd_total_s,hybrid_total_s,psi,t_avg_switch,"
          "l2_T,mse_T,mae_T,maxae_T,l2_U,mse_U,mae_U,maxae_U\n";
    os.precision(10);
    for (const auto& r : rows) {
        os << r.tl_epochs << "," << r.residual_threshold << "," << r.t_cfd << ","
           << r.t_ml << "," << r.t_up << "," << r.n_switch << "," << r.n_cfd << ","
           << r.n_ml << "," << r.cfd_total_s << "," << r.hybrid_total_s << ","
           << r.psi << "," << r.avg_steps_per_switch << "," << r.temp.rel_l2 << ","
           << r.temp.mse << "," << r.temp.mae << "," << r.temp.maxae << ","
           << r.umag.rel_l2 << "," << r.umag.mse << "," << r.umag.mae << ","
           << r.umag.maxae << "\n";
    }
}

}  // namespace hybridfv
