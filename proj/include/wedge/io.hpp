#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "wedge/diagnostics.hpp"

namespace wedge {

inline constexpr int schema_version = 1;

// ---- plain tables

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const; // throws ErrorKind::io when absent
};

std::string fmt(double x); // 17 significant digits
void write_csv(const std::string& path, const CsvTable& t);
CsvTable read_csv(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// ---- run artifacts

// node table: i, j, z1, z2, full state and the four perturbations
CsvTable fields_table(const WedgeProblem& pb, const IterationField& v);
// trace table: i, z2, sigma, sigma', dsigma' and the transported entropy,
// Bernoulli value and consistency defect of the final application of Q
CsvTable shock_table(const WedgeProblem& pb, const FixedPointResult& run);
CsvTable history_table(const std::vector<IterationRecord>& h);

// shock trace mapped back to physical coordinates (rotated frame, wedge along x1):
// x1 = sigma(y2), x2 = b(x1) + int_0^y2 dpsi / (rho u1) along x1 = const
struct EulerianShock {
    std::vector<double> x1, x2;
};
EulerianShock eulerian_shock(const WedgeProblem& pb, const IterationField& v);
CsvTable eulerian_shock_table(const EulerianShock& s);

// inverse of fields_table / shock_table for a run saved on the same grid
IterationField read_iterate(const WedgeProblem& pb, const CsvTable& fields, const CsvTable& shock);
// trace products saved by shock_table
void read_trace_stages(const CsvTable& shock, QStages& st);
std::vector<IterationRecord> read_history(const CsvTable& t);

nlohmann::json report_json(const DiagnosticsReport& r);

} // namespace wedge
