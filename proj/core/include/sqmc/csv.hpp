#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sqmc/experiment.hpp"

namespace sqmc {

/// Run archive columns, in order.
inline constexpr const char* kRunCsvHeader =
    "model,engine,formalism,construction,N,M,T,t,replication,estimate_mean_x1,log_likelihood";
/// Report columns, in order.
inline constexpr const char* kReportCsvHeader = "model,engine,N,t,mse,variance,gain";

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows);
std::vector<RunRow> read_runs_csv(std::istream& in);

void write_report_csv(std::ostream& out, const GainTable& table);
/// Metric, quantity and reference are not part of the CSV and are left empty.
GainTable read_report_csv(std::istream& in);

void write_gain_summary_csv(std::ostream& out, const std::vector<GainSummary>& summary);

/// Dataset CSV: "t,y1,...,yd".
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, ModelId model);

/// Throws std::runtime_error naming the file on I/O failure.
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path, ModelId model);

}  // namespace sqmc
