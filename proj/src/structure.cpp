// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The qcnet Authors

#include "qcnet/structure.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qcnet/error.hpp"

namespace qcnet {

using nlohmann::json;

Vec3 CrystalStructure::cartesian(std::size_t i, const std::array<int, 3>& offset) const {
  Vec3 f = frac[i] + Vec3(offset[0], offset[1], offset[2]);
  return lattice.transpose() * f;
}

bool CrystalStructure::operator==(const CrystalStructure& other) const {
  if (lattice != other.lattice || species != other.species || id != other.id) return false;
  if (frac.size() != other.frac.size()) return false;
  for (std::size_t i = 0; i < frac.size(); ++i) {
    if (frac[i] != other.frac[i]) return false;
  }
  return true;
}

double wrap_unit(double x) {
  double w = x - std::floor(x);
  // x slightly below an integer rounds to exactly 1.0
  if (w >= 1.0) w = 0.0;
  if (w == 0.0) w = 0.0;  // drops the sign of -0.0
  return w;
}

CrystalStructure canonicalize(CrystalStructure s) {
  if (s.species.empty()) throw MalformedInput("structure has no atoms", 0, "species");
  if (s.frac.size() != s.species.size()) {
    throw MalformedInput("species and frac lengths differ", 0, "frac");
  }
  if (!s.lattice.allFinite()) throw MalformedInput("non-finite lattice entry", 0, "lattice");
  const double det = s.lattice.determinant();
  if (!(std::abs(det) > kMinCellVolume)) {
    throw Error(ErrorKind::DegenerateLattice,
                "degenerate lattice: |det| = " + std::to_string(std::abs(det)));
  }
  for (int z : s.species) {
    if (z < 1 || z > kMaxAtomicNumber) {
      throw Error(ErrorKind::UnknownSpecies, "unknown species Z=" + std::to_string(z));
    }
  }
  for (auto& f : s.frac) {
    if (!f.allFinite()) throw MalformedInput("non-finite fractional coordinate", 0, "frac");
    for (int c = 0; c < 3; ++c) f[c] = wrap_unit(f[c]);
  }
  return s;
}

namespace {

int line_of_offset(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

double number_at(const json& j, const char* field) {
  if (!j.is_number()) throw MalformedInput("expected a number", 0, field);
  return j.get<double>();
}

CrystalStructure structure_from_json(const json& j) {
  if (!j.is_object()) throw MalformedInput("structure must be a JSON object");
  for (const char* key : {"lattice", "species", "frac"}) {
    if (!j.contains(key)) throw MalformedInput("missing key", 0, key);
  }
  CrystalStructure s;
  const json& lat = j.at("lattice");
  if (!lat.is_array() || lat.size() != 3) throw MalformedInput("lattice must be 3x3", 0, "lattice");
  for (int r = 0; r < 3; ++r) {
    const json& row = lat[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3) throw MalformedInput("lattice must be 3x3", 0, "lattice");
    for (int c = 0; c < 3; ++c) s.lattice(r, c) = number_at(row[static_cast<std::size_t>(c)], "lattice");
  }
  const json& sp = j.at("species");
  if (!sp.is_array()) throw MalformedInput("species must be an array", 0, "species");
  for (const auto& z : sp) {
    if (!z.is_number_integer()) throw MalformedInput("species must be integers", 0, "species");
    s.species.push_back(z.get<int>());
  }
  const json& fr = j.at("frac");
  if (!fr.is_array()) throw MalformedInput("frac must be an array", 0, "frac");
  for (const auto& row : fr) {
    if (!row.is_array() || row.size() != 3) throw MalformedInput("frac rows need 3 entries", 0, "frac");
    s.frac.emplace_back(number_at(row[0], "frac"), number_at(row[1], "frac"),
                        number_at(row[2], "frac"));
  }
  if (j.contains("id") && !j.at("id").is_null()) {
    if (!j.at("id").is_string()) throw MalformedInput("id must be a string", 0, "id");
    s.id = j.at("id").get<std::string>();
  }
  return canonicalize(std::move(s));
}

json structure_to_json(const CrystalStructure& s) {
  auto finite = [](double x) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "cannot serialize non-finite value");
    return x;
  };
  json j = json::object();
  json lat = json::array();
  for (int r = 0; r < 3; ++r) {
    lat.push_back({finite(s.lattice(r, 0)), finite(s.lattice(r, 1)), finite(s.lattice(r, 2))});
  }
  json fr = json::array();
  for (const auto& f : s.frac) fr.push_back({finite(f[0]), finite(f[1]), finite(f[2])});
  j["lattice"] = std::move(lat);
  j["species"] = s.species;
  j["frac"] = std::move(fr);
  if (s.id) j["id"] = *s.id;
  return j;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line, const char* field) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw MalformedInput("bad number '" + tok + "'", line, field);
  }
  return v;
}

CrystalStructure parse_poscar(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(text)};
    for (std::string l; std::getline(in, l);) {
      if (!l.empty() && l.back() == '\r') l.pop_back();
      lines.push_back(l);
    }
  }
  std::size_t cur = 0;
  auto need = [&](const char* what) -> const std::string& {
    if (cur >= lines.size()) {
      throw MalformedInput(std::string("unexpected end of POSCAR, expected ") + what,
                           static_cast<int>(cur + 1), what);
    }
    return lines[cur++];
  };

  CrystalStructure s;
  std::string comment = need("comment");
  while (!comment.empty() && std::isspace(static_cast<unsigned char>(comment.back()))) comment.pop_back();
  std::size_t lead = comment.find_first_not_of(" \t");
  if (lead != std::string::npos) s.id = comment.substr(lead);

  auto scale_tok = split_ws(need("scale"));
  if (scale_tok.empty()) throw MalformedInput("missing scale factor", 2, "scale");
  const double scale = parse_double(scale_tok[0], 2, "scale");

  for (int r = 0; r < 3; ++r) {
    const int ln = static_cast<int>(cur + 1);
    auto tok = split_ws(need("lattice"));
    if (tok.size() < 3) throw MalformedInput("lattice row needs 3 numbers", ln, "lattice");
    for (int c = 0; c < 3; ++c) s.lattice(r, c) = parse_double(tok[static_cast<std::size_t>(c)], ln, "lattice");
  }
  if (scale < 0.0) {
    // VASP convention: a negative scale is the target cell volume.
    const double vol = std::abs(s.lattice.determinant());
    if (!(vol > kMinCellVolume)) throw Error(ErrorKind::DegenerateLattice, "degenerate lattice");
    s.lattice *= std::cbrt(-scale / vol);
  } else {
    s.lattice *= scale;
  }

  const int sym_line = static_cast<int>(cur + 1);
  auto symbols = split_ws(need("species"));
  std::vector<int> zs;
  for (const auto& sym : symbols) {
    int z = atomic_number(sym);
    if (z == 0) {
      throw MalformedInput("unknown element symbol '" + sym + "' (VASP5 species line required)",
                           sym_line, "species");
    }
    zs.push_back(z);
  }
  const int count_line = static_cast<int>(cur + 1);
  auto counts = split_ws(need("counts"));
  if (counts.size() != zs.size() || zs.empty()) {
    throw MalformedInput("species/count lines disagree", count_line, "counts");
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(counts[k].data(), counts[k].data() + counts[k].size(), n);
    if (ec != std::errc() || ptr != counts[k].data() + counts[k].size() || n < 0) {
      throw MalformedInput("bad atom count '" + counts[k] + "'", count_line, "counts");
    }
    s.species.insert(s.species.end(), static_cast<std::size_t>(n), zs[k]);
  }

  std::string mode = need("coordinate mode");
  auto first_char = [](const std::string& l) {
    auto p = l.find_first_not_of(" \t");
    return p == std::string::npos ? '\0' : static_cast<char>(std::tolower(static_cast<unsigned char>(l[p])));
  };
  bool selective = false;
  if (first_char(mode) == 's') {
    selective = true;
    mode = need("coordinate mode");
  }
  (void)selective;
  if (first_char(mode) != 'd') {
    throw MalformedInput("only Direct coordinates are supported", static_cast<int>(cur), "mode");
  }
  for (std::size_t i = 0; i < s.species.size(); ++i) {
    const int ln = static_cast<int>(cur + 1);
    auto tok = split_ws(need("coordinates"));
    if (tok.size() < 3) throw MalformedInput("coordinate row needs 3 numbers", ln, "frac");
    s.frac.emplace_back(parse_double(tok[0], ln, "frac"), parse_double(tok[1], ln, "frac"),
                        parse_double(tok[2], ln, "frac"));
  }
  return canonicalize(std::move(s));
}

}  // namespace

CrystalStructure parse_structure(std::string_view text, StructureFormat format) {
  if (format == StructureFormat::Poscar) return parse_poscar(text);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("invalid JSON: ") + e.what(), line_of_offset(text, e.byte));
  }
  return structure_from_json(j);
}

std::string write_structure(const CrystalStructure& s, StructureFormat format) {
  if (format != StructureFormat::Json) {
    throw Error(ErrorKind::InvalidArgument, "POSCAR is an input-only format");
  }
  return structure_to_json(s).dump();
}

CrystalStructure read_structure_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw MalformedInput(path.string() + ": empty structure file", 1);
  }
  const auto ext = path.extension().string();
  const auto name = path.filename().string();
  const bool json_like = ext == ".json" || text[text.find_first_not_of(" \t\r\n")] == '{';
  const auto fmt = (!json_like || name.find("POSCAR") != std::string::npos || ext == ".vasp")
                       ? StructureFormat::Poscar
                       : StructureFormat::Json;
  try {
    return parse_structure(text, fmt);
  } catch (const MalformedInput& e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train: return "train";
    case SplitTag::Val: return "val";
    case SplitTag::Test: return "test";
  }
  return "train";
}

DatasetLoad parse_dataset(std::string_view text) {
  DatasetLoad out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw MalformedInput("record must be an object");
      if (!j.contains("structure")) throw MalformedInput("missing key", 0, "structure");
      if (!j.contains("target") || !j.at("target").is_number()) {
        throw MalformedInput("missing or non-numeric target", 0, "target");
      }
      DatasetRecord rec;
      rec.structure = structure_from_json(j.at("structure"));
      if (j.contains("id") && j.at("id").is_string()) rec.structure.id = j.at("id").get<std::string>();
      rec.target = j.at("target").get<double>();
      if (!std::isfinite(rec.target)) throw MalformedInput("target is not finite", 0, "target");
      if (j.contains("split") && !j.at("split").is_null()) {
        const auto tag = j.at("split").get<std::string>();
        if (tag == "train") rec.split = SplitTag::Train;
        else if (tag == "val") rec.split = SplitTag::Val;
        else if (tag == "test") rec.split = SplitTag::Test;
        else throw MalformedInput("unknown split '" + tag + "'", 0, "split");
      }
      out.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      out.diagnostics.push_back({line_no, std::string("SchemaError: ") + e.what()});
    } catch (const Error& e) {
      out.diagnostics.push_back({line_no, std::string(to_string(e.kind())) + ": " + e.what()});
    }
  }
  return out;
}

DatasetLoad load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::string write_dataset_record(const DatasetRecord& r) {
  json j = json::object();
  CrystalStructure bare = r.structure;
  bare.id.reset();
  j["structure"] = structure_to_json(bare);
  if (r.structure.id) j["id"] = *r.structure.id;
  if (!std::isfinite(r.target)) throw Error(ErrorKind::InvalidArgument, "non-finite target");
  j["target"] = r.target;
  if (r.split) j["split"] = to_string(*r.split);
  return j.dump();
}

}  // namespace qcnet
