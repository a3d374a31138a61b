#include "hybridfv/report.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace hybridfv {

void print_ledger(const HybridLedger& ledger, long total_steps, std::ostream& os) {
    const double psi = speedup_psi(ledger, total_steps);
    os << "steps completed : " << ledger.completed_steps() << " / " << total_steps
       << "\n"
       << "n_cfd           : " << ledger.n_cfd << "\n"
       << "n_ml            : " << ledger.n_ml << "\n"
       << "n_switch        : " << ledger.n_switch << "\n"
       << "forced switches : " << ledger.forced_switches << "\n"
       << "flux fallbacks  : " << ledger.flux_fallbacks << "\n"
       << std::scientific << std::setprecision(4)
       << "t_cfd mean [s]  : " << ledger.t_cfd_mean() << "\n"
       << "t_ml mean [s]   : " << ledger.t_ml_mean() << "\n"
       << "t_up mean [s]   : " << ledger.t_up_mean() << "\n"
       << "initial train[s]: " << ledger.t_initial_train << "\n"
       << "wall total [s]  : " << ledger.wall_total << "\n"
       << std::defaultfloat << std::setprecision(4)
       << "mean steps/switch: "
       << (ledger.n_switch > 0
               ? static_cast<double>(ledger.n_ml) / ledger.n_switch
               : 0.0)
       << "\n"
       << "psi             : " << psi << "\n";
    if (ledger.degenerate_reference)
        os << "note: a degenerate (near-zero) reference residual was floored\n";
}

void write_ledger_csv(const HybridLedger& ledger, long total_steps, int tl_epochs,
                      double residual_threshold, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "epochs,res,t_cfd,t_ml,t_up,n_switch,n_cfd,n_ml,"
          "cfd_total_s,hybrid_total_s,psi,t_avg_switch\n";
    os.precision(10);
    const double bucket_sum = ledger.n_cfd * ledger.t_cfd_mean() +
                              ledger.n_ml * ledger.t_ml_mean() +
                              ledger.n_switch * ledger.t_up_mean();
    os << tl_epochs << "," << residual_threshold << "," << ledger.t_cfd_mean()
       << "," << ledger.t_ml_mean() << "," << ledger.t_up_mean() << ","
       << ledger.n_switch << "," << ledger.n_cfd << "," << ledger.n_ml << ","
       << total_steps * ledger.t_cfd_mean() << "," << bucket_sum << ","
       << speedup_psi(ledger, total_steps) << ","
       << (ledger.n_switch > 0 ? static_cast<double>(ledger.n_ml) / ledger.n_switch
                               : 0.0)
       << "\n";
}

void write_residual_trace_csv(const HybridLedger& ledger, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "step,r_rel,accepted,forced\n";
    os.precision(12);
    for (const auto& r : ledger.residual_trace)
        os << r.step << "," << r.r_rel << "," << (r.accepted ? 1 : 0) << ","
           << (r.forced ? 1 : 0) << "\n";
}

}  // namespace hybridfv
