#ifndef ROBFCP_REPORT_IO_H_
#define ROBFCP_REPORT_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robfcp/score.h"
#include "robfcp/sketch.h"

namespace robfcp {

// ClientReport wire format, one JSON object per line:
//   {"client_id": <int>, "n": <int>, "edges": [H+1 floats], "v": [H floats]}
// Keys in that order; floats printed with 17 significant digits.
std::string report_to_json_line(const ClientReport& report);

// Throws ParseError on malformed JSON or reports violating the simplex /
// edge invariants.
ClientReport report_from_json_line(std::string_view line);

void write_reports_jsonl(std::ostream& out, std::span<const ClientReport> reports);

// Blank lines are skipped; errors carry the 1-based line number.
std::vector<ClientReport> read_reports_jsonl(std::istream& in);
std::vector<ClientReport> read_reports_file(const std::filesystem::path& path);

// Probability CSV: header `client_id,label,p_0,...,p_{C-1}`, one row per
// sample. Rows whose probabilities sum to 1 within 1e-6 are renormalized;
// others are rejected.
std::map<std::int64_t, std::vector<LabeledProbs>> read_probability_csv(std::istream& in);

}  // namespace robfcp

#endif  // ROBFCP_REPORT_IO_H_
