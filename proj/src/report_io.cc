#include "robfcp/report_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "robfcp/error.h"

namespace robfcp {

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

void append_array(std::string& out, std::span<const double> xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    append_double(out, xs[i]);
  }
  out += ']';
}

std::vector<double> number_array(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& x : *it) {
    if (!x.is_number()) throw ParseError(std::string("field '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::int64_t integer_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_number_integer()) {
    throw ParseError(std::string("field '") + key + "' must be an integer");
  }
  return it->get<std::int64_t>();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string report_to_json_line(const ClientReport& report) {
  std::string out = "{\"client_id\": " + std::to_string(report.client_id) +
                    ", \"n\": " + std::to_string(report.n) + ", \"edges\": ";
  append_array(out, report.edges.edges());
  out += ", \"v\": ";
  append_array(out, report.v.values());
  out += '}';
  return out;
}

ClientReport report_from_json_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("report must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "client_id" && key != "n" && key != "edges" && key != "v") {
      throw ParseError("unknown report field '" + key + "'");
    }
  }
  try {
    return ClientReport(integer_field(j, "client_id"), integer_field(j, "n"),
                        CharacterizationVector(number_array(j, "v")),
                        BinEdges(number_array(j, "edges")));
  } catch (const InputError& e) {
    throw ParseError(std::string("invalid report: ") + e.what());
  }
}

void write_reports_jsonl(std::ostream& out, std::span<const ClientReport> reports) {
  for (const auto& r : reports) out << report_to_json_line(r) << '\n';
}

std::vector<ClientReport> read_reports_jsonl(std::istream& in) {
  std::vector<ClientReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      reports.push_back(report_from_json_line(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return reports;
}

std::vector<ClientReport> read_reports_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open reports file '" + path.string() + "'");
  try {
    return read_reports_jsonl(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::map<std::int64_t, std::vector<LabeledProbs>> read_probability_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("probability CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 4 || trim(header[0]) != "client_id" || trim(header[1]) != "label") {
    throw ParseError("line 1: header must be client_id,label,p_0,...,p_{C-1} with C >= 2");
  }
  const std::size_t classes = header.size() - 2;
  for (std::size_t c = 0; c < classes; ++c) {
    if (trim(header[c + 2]) != "p_" + std::to_string(c)) {
      throw ParseError("line 1: expected column 'p_" + std::to_string(c) + "'");
    }
  }

  std::map<std::int64_t, std::vector<LabeledProbs>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != header.size()) {
      throw ParseError(where + "expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    try {
      std::size_t used = 0;
      const std::string id_text = trim(fields[0]);
      const std::int64_t id = std::stoll(id_text, &used);
      if (used != id_text.size()) throw std::invalid_argument("client_id");
      const std::string label_text = trim(fields[1]);
      const long long label = std::stoll(label_text, &used);
      if (used != label_text.size() || label < 0 || static_cast<std::size_t>(label) >= classes) {
        throw ParseError(where + "label out of range");
      }
      std::vector<double> probs(classes);
      double total = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        const std::string text = trim(fields[c + 2]);
        probs[c] = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("probability");
        total += probs[c];
      }
      if (std::abs(total - 1.0) > 1e-6) {
        throw ParseError(where + "probabilities sum to " + std::to_string(total));
      }
      for (double& p : probs) p /= total;
      rows[id].push_back({ProbabilityVector(std::move(probs)), static_cast<std::size_t>(label)});
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(where + e.what());
    } catch (const std::exception&) {
      throw ParseError(where + "malformed number");
    }
  }
  if (rows.empty()) throw ParseError("probability CSV has no data rows");
  return rows;
}

}  // namespace robfcp
