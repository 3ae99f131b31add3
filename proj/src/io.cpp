#include "facecap/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace facecap {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": malformed number '" + s + "'");
  }
}

void check_label_csv_safe(const std::string& label) {
  if (label.find_first_of(",\"\r\n") != std::string::npos)
    throw std::runtime_error("label '" + label +
                             "' contains CSV delimiters; use the EMB1 format");
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(u(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(u(4)); }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string str(std::size_t len) {
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::uint64_t u(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  void need(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("EMB1: truncated payload");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

json capacity_cell_json(const CapacityCell& cell, int d, double r) {
  json j;
  j["d"] = d;
  j["r"] = r;
  if (cell.failed) {
    j["error"] = cell.error;
    return j;
  }
  const CapacityResult& res = cell.result;
  j["N"] = res.capacity;
  j["r_prime"] = res.realized_min_distance;
  j["next_min_distance"] = res.next_min_distance;  // null when ceiling reached
  j["energy"] = res.energy;
  j["converged"] = res.converged;
  j["ceiling_reached"] = res.ceiling_reached;
  j["iterations_used"] = res.iterations_used;
  j["restart_index_of_best"] = res.restart_index_of_best;
  return j;
}

json coverage_cell_json(const CoverageCell& cell, int d, double r) {
  json j;
  j["d"] = d;
  j["r"] = r;
  if (cell.failed) {
    j["error"] = cell.error;
    return j;
  }
  const CoverageResult& res = cell.result;
  j["N_bar"] = res.coverage;
  j["objective"] = res.objective;
  j["worst_match_distance"] = res.worst_match_distance;
  j["min_separation"] = res.min_separation;
  j["feasible_at_coverage"] = res.feasible_at_coverage;
  j["infeasible_at_next"] = res.infeasible_at_next;
  j["converged"] = res.converged;
  j["ceiling_reached"] = res.ceiling_reached;
  j["iterations_used"] = res.iterations_used;
  j["restart_index_of_best"] = res.restart_index_of_best;
  return j;
}

bool cell_usable_capacity(const CapacityCell& cell) {
  return !cell.failed && cell.result.converged && !cell.result.ceiling_reached;
}

bool cell_usable_coverage(const CoverageCell& cell) {
  return !cell.failed && cell.result.converged && !cell.result.ceiling_reached &&
         cell.result.feasible_at_coverage;
}

json capacity_params_json(const CapacityParams& p) {
  return json{{"alpha", p.alpha}, {"beta", p.beta},
              {"gamma", p.gamma}, {"delta", p.delta}};
}

json coverage_params_json(const CoverageParams& p) {
  return json{{"alpha_bar", p.alpha_bar}, {"beta_bar", p.beta_bar},
              {"gamma_bar", p.gamma_bar}, {"delta_bar", p.delta_bar}};
}

json fixed_json(const FixedConstants& f) {
  return json{{"phi", f.phi}, {"epsilon", f.epsilon}};
}

json histogram_json(const Histogram& h) {
  return json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

std::string fmr_column_label(double f) {
  std::ostringstream os;
  os << f;
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string capacity_sweep_csv(const CapacitySweep& sweep) {
  std::string out = "d,r,N,r_prime,energy,converged\n";
  for (std::size_t di = 0; di < sweep.dims.size(); ++di) {
    for (std::size_t ri = 0; ri < sweep.radii.size(); ++ri) {
      const CapacityCell& cell = sweep.cell(di, ri);
      if (cell.failed) continue;
      out += std::to_string(sweep.dims[di]) + ',' + format_double(sweep.radii[ri]) +
             ',' + std::to_string(cell.result.capacity) + ',' +
             format_double(cell.result.realized_min_distance) + ',' +
             format_double(cell.result.energy) + ',' +
             (cell_usable_capacity(cell) ? "1" : "0") + '\n';
    }
  }
  return out;
}

std::string capacity_sweep_json(const CapacitySweep& sweep) {
  json j;
  j["model"] = "capacity";
  j["dims"] = sweep.dims;
  j["radii"] = sweep.radii;
  json cells = json::array();
  for (std::size_t di = 0; di < sweep.dims.size(); ++di)
    for (std::size_t ri = 0; ri < sweep.radii.size(); ++ri)
      cells.push_back(capacity_cell_json(sweep.cell(di, ri), sweep.dims[di],
                                         sweep.radii[ri]));
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::string coverage_sweep_csv(const CoverageSweep& sweep) {
  std::string out = "d,r,N_bar,min_separation,objective,converged\n";
  for (std::size_t di = 0; di < sweep.dims.size(); ++di) {
    for (std::size_t ri = 0; ri < sweep.radii.size(); ++ri) {
      const CoverageCell& cell = sweep.cell(di, ri);
      if (cell.failed) continue;
      out += std::to_string(sweep.dims[di]) + ',' + format_double(sweep.radii[ri]) +
             ',' + std::to_string(cell.result.coverage) + ',' +
             format_double(cell.result.min_separation) + ',' +
             format_double(cell.result.objective) + ',' +
             (cell_usable_coverage(cell) ? "1" : "0") + '\n';
    }
  }
  return out;
}

std::string coverage_sweep_json(const CoverageSweep& sweep) {
  json j;
  j["model"] = "coverage";
  j["dims"] = sweep.dims;
  j["radii"] = sweep.radii;
  json cells = json::array();
  for (std::size_t di = 0; di < sweep.dims.size(); ++di)
    for (std::size_t ri = 0; ri < sweep.radii.size(); ++ri)
      cells.push_back(coverage_cell_json(sweep.cell(di, ri), sweep.dims[di],
                                         sweep.radii[ri]));
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::vector<SweepRow> read_sweep_rows(const std::filesystem::path& path,
                                      const std::string& model) {
  if (model != "capacity" && model != "coverage")
    throw std::invalid_argument("read_sweep_rows: unknown model '" + model + "'");
  const std::string count_col = model == "capacity" ? "N" : "N_bar";
  const std::string text = read_text_file(path);

  std::vector<SweepRow> rows;
  if (path.extension() == ".json") {
    const json j = json::parse(text);
    if (!j.contains("model") || j["model"] != model)
      throw std::runtime_error(path.string() + ": schema error, expected a " +
                               model + " sweep");
    for (const auto& cell : j.at("cells")) {
      if (cell.contains("error")) {
        rows.push_back({cell.at("d").get<int>(), cell.at("r").get<double>(), 0.0,
                        false});
        continue;
      }
      SweepRow row;
      row.dim = cell.at("d").get<int>();
      row.radius = cell.at("r").get<double>();
      row.count = cell.at(count_col).get<double>();
      row.usable = cell.at("converged").get<bool>() &&
                   !cell.at("ceiling_reached").get<bool>();
      rows.push_back(row);
    }
    return rows;
  }

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path.string() + ": empty sweep file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  int d_col = -1, r_col = -1, n_col = -1, conv_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "d") d_col = static_cast<int>(c);
    else if (header[c] == "r") r_col = static_cast<int>(c);
    else if (header[c] == count_col) n_col = static_cast<int>(c);
    else if (header[c] == "converged") conv_col = static_cast<int>(c);
  }
  if (d_col < 0 || r_col < 0 || n_col < 0)
    throw std::runtime_error(path.string() + ": schema error, expected columns d,r," +
                             count_col);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": malformed record");
    const std::string where = path.string() + ":" + std::to_string(lineno);
    SweepRow row;
    row.dim = static_cast<int>(parse_double(fields[static_cast<std::size_t>(d_col)], where));
    row.radius = parse_double(fields[static_cast<std::size_t>(r_col)], where);
    row.count = parse_double(fields[static_cast<std::size_t>(n_col)], where);
    row.usable = conv_col < 0 ||
                 parse_double(fields[static_cast<std::size_t>(conv_col)], where) != 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows,
                           const std::string& model) {
  const std::string count_col = model == "capacity" ? "N" : "N_bar";
  std::string out = "d,r," + count_col + ",converged\n";
  for (const auto& row : rows)
    out += std::to_string(row.dim) + ',' + format_double(row.radius) + ',' +
           format_double(row.count) + ',' + (row.usable ? "1" : "0") + '\n';
  return out;
}

std::string fit_report_json(const FitReport& report, const std::string& model) {
  json j;
  j["model"] = model;
  if (report.params.capacity)
    j["capacity"] = capacity_params_json(*report.params.capacity);
  if (report.params.coverage)
    j["coverage"] = coverage_params_json(*report.params.coverage);
  j["fixed"] = fixed_json(report.params.fixed);
  json per_dim = json::array();
  for (const auto& p : report.per_dim) {
    if (model == "capacity")
      per_dim.push_back(json{{"d", p.dim}, {"A", p.a}, {"B", p.b},
                             {"residual", p.residual}});
    else
      per_dim.push_back(json{{"d", p.dim}, {"A_bar", p.a}, {"B_bar", p.b},
                             {"residual", p.residual}});
  }
  j["per_dim"] = std::move(per_dim);
  json excluded = json::array();
  for (const auto& e : report.excluded)
    excluded.push_back(json{{"d", e.dim}, {"r", e.radius}, {"reason", e.reason}});
  j["excluded"] = std::move(excluded);
  j["stage2_residuals"] = json{{"A", report.stage2_residual_a},
                               {"B", report.stage2_residual_b}};
  return j.dump(2) + "\n";
}

std::string params_json(const FitParams& params) {
  json j;
  if (params.capacity) j["capacity"] = capacity_params_json(*params.capacity);
  if (params.coverage) j["coverage"] = coverage_params_json(*params.coverage);
  j["fixed"] = fixed_json(params.fixed);
  return j.dump(2) + "\n";
}

FitParams read_params_files(const std::vector<std::filesystem::path>& paths) {
  FitParams params;
  bool have_fixed = false;
  for (const auto& path : paths) {
    const json j = json::parse(read_text_file(path));
    if (j.contains("capacity")) {
      if (params.capacity)
        throw std::runtime_error(path.string() + ": duplicate capacity parameters");
      const json& c = j["capacity"];
      params.capacity = CapacityParams{c.at("alpha"), c.at("beta"),
                                       c.at("gamma"), c.at("delta")};
    }
    if (j.contains("coverage")) {
      if (params.coverage)
        throw std::runtime_error(path.string() + ": duplicate coverage parameters");
      const json& c = j["coverage"];
      params.coverage = CoverageParams{c.at("alpha_bar"), c.at("beta_bar"),
                                       c.at("gamma_bar"), c.at("delta_bar")};
      if (j.contains("fixed")) {
        params.fixed = FixedConstants{j["fixed"].at("phi"), j["fixed"].at("epsilon")};
        have_fixed = true;
      }
    }
    if (!have_fixed && j.contains("fixed"))
      params.fixed = FixedConstants{j["fixed"].at("phi"), j["fixed"].at("epsilon")};
  }
  return params;
}

std::string effectiveness_csv(const EffectivenessGrid& grid) {
  std::string out = "d,r,fmr_label,capacity,coverage,eta,flags\n";
  for (std::size_t di = 0; di < grid.dims.size(); ++di) {
    for (std::size_t ri = 0; ri < grid.radii.size(); ++ri) {
      const auto d = static_cast<Eigen::Index>(di);
      const auto r = static_cast<Eigen::Index>(ri);
      out += std::to_string(grid.dims[di]) + ',' + format_double(grid.radii[ri]) +
             ',' + (grid.fmr_labels.empty() ? "" : grid.fmr_labels[ri]) + ',' +
             format_double(grid.capacity(d, r)) + ',' +
             format_double(grid.coverage(d, r)) + ',' +
             format_double(grid.eta(d, r)) + ',' + grid.flag(di, ri) + '\n';
    }
  }
  return out;
}

std::string effectiveness_json(const EffectivenessGrid& grid) {
  json j;
  j["dims"] = grid.dims;
  j["radii"] = grid.radii;
  if (!grid.fmr_labels.empty()) j["fmr_labels"] = grid.fmr_labels;
  json cells = json::array();
  for (std::size_t di = 0; di < grid.dims.size(); ++di) {
    for (std::size_t ri = 0; ri < grid.radii.size(); ++ri) {
      const auto d = static_cast<Eigen::Index>(di);
      const auto r = static_cast<Eigen::Index>(ri);
      json cell{{"d", grid.dims[di]},
                {"r", grid.radii[ri]},
                {"capacity", grid.capacity(d, r)},
                {"coverage", grid.coverage(d, r)},
                {"eta", grid.eta(d, r)}};
      if (!grid.fmr_labels.empty()) cell["fmr_label"] = grid.fmr_labels[ri];
      if (!grid.flag(di, ri).empty()) cell["flags"] = grid.flag(di, ri);
      cells.push_back(std::move(cell));
    }
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::string encode_emb1(const EmbeddingDataset& db) {
  std::string out = "EMB1";
  put_u32(out, static_cast<std::uint32_t>(db.size()));
  put_u32(out, static_cast<std::uint32_t>(db.dim));
  for (Eigen::Index i = 0; i < db.size(); ++i) {
    const EmbeddingRecord& rec = db.records[static_cast<std::size_t>(i)];
    if (rec.identity.size() > 0xffff || rec.image_id.size() > 0xffff)
      throw std::runtime_error("EMB1: label longer than 65535 bytes");
    put_u16(out, static_cast<std::uint16_t>(rec.identity.size()));
    out += rec.identity;
    put_u16(out, static_cast<std::uint16_t>(rec.image_id.size()));
    out += rec.image_id;
    for (Eigen::Index c = 0; c < db.dim; ++c)
      put_f32(out, static_cast<float>(db.vectors(i, c)));
  }
  return out;
}

EmbeddingDataset decode_emb1(const std::string& bytes) {
  ByteReader reader(bytes);
  if (reader.str(4) != "EMB1") throw std::runtime_error("EMB1: bad magic bytes");
  const std::uint32_t count = reader.u32();
  const std::uint32_t dim = reader.u32();
  if (count == 0) throw std::runtime_error("EMB1: empty dataset");

  std::vector<EmbeddingRecord> records;
  records.reserve(count);
  Eigen::MatrixXd raw(count, dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord rec;
    rec.identity = reader.str(reader.u16());
    rec.image_id = reader.str(reader.u16());
    for (std::uint32_t c = 0; c < dim; ++c)
      raw(i, c) = static_cast<double>(reader.f32());
    records.push_back(std::move(rec));
  }
  if (!reader.exhausted())
    throw std::runtime_error("EMB1: trailing bytes after declared records");
  return make_dataset(static_cast<int>(dim), std::move(records), std::move(raw));
}

namespace {

EmbeddingDataset read_dataset_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "identity" || header[1] != "image_id")
    throw std::runtime_error(path.string() +
                             ": schema error, expected identity,image_id,v0,...");
  const int dim = static_cast<int>(header.size()) - 2;
  for (int c = 0; c < dim; ++c)
    if (header[static_cast<std::size_t>(c + 2)] != "v" + std::to_string(c))
      throw std::runtime_error(path.string() + ": schema error in vector columns");

  std::vector<EmbeddingRecord> records;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != header.size())
      throw std::runtime_error(where + ": malformed record (expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()) + ")");
    records.push_back({fields[0], fields[1]});
    for (int c = 0; c < dim; ++c)
      values.push_back(parse_double(fields[static_cast<std::size_t>(c + 2)], where));
  }
  if (records.empty()) throw std::runtime_error(path.string() + ": no records");
  Eigen::MatrixXd raw(records.size(), dim);
  for (std::size_t i = 0; i < records.size(); ++i)
    for (int c = 0; c < dim; ++c)
      raw(static_cast<Eigen::Index>(i), c) = values[i * static_cast<std::size_t>(dim) +
                                                    static_cast<std::size_t>(c)];
  return make_dataset(dim, std::move(records), std::move(raw));
}

std::string dataset_csv(const EmbeddingDataset& db) {
  std::string out = "identity,image_id";
  for (int c = 0; c < db.dim; ++c) out += ",v" + std::to_string(c);
  out += '\n';
  for (Eigen::Index i = 0; i < db.size(); ++i) {
    const EmbeddingRecord& rec = db.records[static_cast<std::size_t>(i)];
    check_label_csv_safe(rec.identity);
    check_label_csv_safe(rec.image_id);
    out += rec.identity + ',' + rec.image_id;
    for (Eigen::Index c = 0; c < db.dim; ++c)
      out += ',' + format_double(db.vectors(i, c));
    out += '\n';
  }
  return out;
}

DatasetFormat detect_format(const std::filesystem::path& path, bool for_write) {
  const auto ext = path.extension();
  if (ext == ".csv") return DatasetFormat::csv;
  if (ext == ".emb1" || ext == ".bin" || ext == ".emb") return DatasetFormat::emb1;
  if (for_write) return DatasetFormat::emb1;
  return DatasetFormat::auto_detect;  // sniff magic on read
}

}  // namespace

EmbeddingDataset read_dataset(const std::filesystem::path& path,
                              DatasetFormat format) {
  if (format == DatasetFormat::auto_detect) {
    format = detect_format(path, false);
    if (format == DatasetFormat::auto_detect) {
      const std::string head = read_text_file(path).substr(0, 4);
      format = head == "EMB1" ? DatasetFormat::emb1 : DatasetFormat::csv;
    }
  }
  if (format == DatasetFormat::emb1) return decode_emb1(read_text_file(path));
  return read_dataset_csv(path);
}

void write_dataset(const std::filesystem::path& path, const EmbeddingDataset& db,
                   DatasetFormat format) {
  if (format == DatasetFormat::auto_detect) format = detect_format(path, true);
  if (format == DatasetFormat::emb1)
    write_text_file(path, encode_emb1(db));
  else
    write_text_file(path, dataset_csv(db));
}

std::string eval_report_json(const EvalReport& report) {
  json j;
  j["db"] = json{{"path", report.db_path},
                 {"records", report.db_records},
                 {"identities", report.db_identities},
                 {"dim", report.dim}};
  j["sampling"] = json{{"seed", report.sampling.seed},
                       {"pair_cap", report.sampling.pair_cap},
                       {"genuine_total", report.sampling.genuine_total},
                       {"imposter_total", report.sampling.imposter_total},
                       {"genuine_subsampled", report.sampling.genuine_subsampled},
                       {"imposter_subsampled", report.sampling.imposter_subsampled}};
  json thr = json::array();
  for (const auto& row : report.thresholds.rows)
    thr.push_back(json{{"target_fmr", row.target_fmr},
                       {"threshold", row.threshold},
                       {"achieved_fmr", row.achieved_fmr},
                       {"fnmr", row.fnmr},
                       {"insufficient_imposters", row.insufficient_imposters},
                       {"fnmr_undefined", row.fnmr_undefined}});
  j["thresholds"] = std::move(thr);
  json sets = json::array();
  for (const auto& [label, count] : report.attack_sets)
    sets.push_back(json{{"label", label}, {"count", count}});
  j["attack_sets"] = std::move(sets);

  json per_attack = json::array();
  for (const auto& row : report.coverage.per_attack)
    per_attack.push_back(json{{"attack_set", row.attack_set},
                              {"attack_image", row.attack_image},
                              {"target_fmr", row.target_fmr},
                              {"threshold", row.threshold},
                              {"sample_fraction", row.sample_fraction},
                              {"identity_fraction", row.identity_fraction}});
  json aggregate = json::array();
  for (const auto& row : report.coverage.aggregate)
    aggregate.push_back(json{{"attack_set", row.attack_set},
                             {"target_fmr", row.target_fmr},
                             {"threshold", row.threshold},
                             {"sample_coverage", row.sample_coverage},
                             {"identity_coverage", row.identity_coverage}});
  j["coverage"] = json{{"per_attack", std::move(per_attack)},
                       {"aggregate", std::move(aggregate)}};

  json hist;
  for (const auto& [name, h] : report.histograms) hist[name] = histogram_json(h);
  j["histograms"] = json{{"bins", report.histogram_bins}, {"series", std::move(hist)}};
  return j.dump(2) + "\n";
}

std::string eval_coverage_table_csv(const EvalReport& report) {
  // Column order follows the aggregate rows of the first attack set.
  std::vector<double> fmrs;
  for (const auto& row : report.coverage.aggregate) {
    if (!report.coverage.aggregate.empty() &&
        row.attack_set != report.coverage.aggregate.front().attack_set)
      break;
    fmrs.push_back(row.target_fmr);
  }
  std::string out = "attack_set";
  for (double f : fmrs) out += ",sample_coverage@fmr_" + fmr_column_label(f);
  for (double f : fmrs) out += ",identity_coverage@fmr_" + fmr_column_label(f);
  out += '\n';

  std::string current;
  std::vector<double> sample, identity;
  auto flush = [&]() {
    if (current.empty()) return;
    out += current;
    for (double v : sample) out += ',' + format_double(v);
    for (double v : identity) out += ',' + format_double(v);
    out += '\n';
  };
  for (const auto& row : report.coverage.aggregate) {
    if (row.attack_set != current) {
      flush();
      current = row.attack_set;
      sample.clear();
      identity.clear();
    }
    sample.push_back(row.sample_coverage);
    identity.push_back(row.identity_coverage);
  }
  flush();
  return out;
}

std::string eval_histograms_csv(const EvalReport& report) {
  std::vector<std::string> names;
  for (const auto& [name, h] : report.histograms) names.push_back(name);
  std::string out = "bin_lo,bin_hi";
  for (const auto& name : names) out += ',' + name;
  out += '\n';
  if (report.histograms.empty()) return out;
  const Histogram& first = report.histograms.begin()->second;
  const std::size_t bins = first.counts.size();
  const double w = (first.hi - first.lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out += format_double(first.lo + static_cast<double>(b) * w) + ',' +
           format_double(b + 1 == bins ? first.hi
                                       : first.lo + static_cast<double>(b + 1) * w);
    for (const auto& name : names)
      out += ',' + std::to_string(report.histograms.at(name).counts[b]);
    out += '\n';
  }
  return out;
}

}  // namespace facecap
