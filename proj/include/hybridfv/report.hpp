#pragma once

#include "hybridfv/hybrid.hpp"

#include <ostream>
#include <string>

namespace hybridfv {

/// Human-readable run summary: counts, mean bucket times, psi.
void print_ledger(const HybridLedger& ledger, long total_steps, std::ostream& os);

/// One-row CSV with the sweep-table schema.
void write_ledger_csv(const HybridLedger& ledger, long total_steps, int tl_epochs,
                      double residual_threshold, const std::string& path);

/// step,r_rel,accepted,forced rows for every rollout step recorded.
void write_residual_trace_csv(const HybridLedger& ledger, const std::string& path);

}  // namespace hybridfv
