#include "evoplan/scenario_io.hpp"

#include <fstream>
#include <map>
#include "json.hpp"
#include <sstream>

#include "evoplan/text.hpp"

namespace evoplan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string where(const std::string& file, std::size_t line, const std::string& field) {
  std::string s = file;
  if (line > 0) s += ":" + std::to_string(line);
  if (!field.empty()) s += " [" + field + "]";
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError(p.filename().string(), 0, "", "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

struct Csv {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line, fields)
};

Csv read_csv(const fs::path& p, const std::vector<std::string>& expected) {
  Csv csv{p.filename().string(), {}, {}};
  const std::string text = read_file(p);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (auto f : split_fields(line)) fields.emplace_back(f);
    if (csv.header.empty()) {
      if (fields != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError(csv.file, line_no, "", "header must be '" + want + "'");
      }
      csv.header = std::move(fields);
      continue;
    }
    if (fields.size() != expected.size()) {
      throw ParseError(csv.file, line_no, "",
                       "expected " + std::to_string(expected.size()) + " fields, got " + std::to_string(fields.size()));
    }
    csv.rows.emplace_back(line_no, std::move(fields));
  }
  if (csv.header.empty()) throw ParseError(csv.file, 0, "", "missing header row");
  return csv;
}

double number(const Csv& csv, std::size_t line, std::size_t col, const std::string& text) {
  const auto v = parse_double(text);
  if (!v) throw ParseError(csv.file, line, csv.header[col], "not a number: '" + text + "'");
  return *v;
}

template <typename Id>
Id lookup(const std::map<std::string, Id, std::less<>>& names, const Csv& csv, std::size_t line, std::size_t col,
          const std::string& key, const char* what) {
  auto it = names.find(key);
  if (it == names.end()) throw ParseError(csv.file, line, csv.header[col], std::string("unknown ") + what + " '" + key + "'");
  return it->second;
}

template <typename Id>
std::map<std::string, Id, std::less<>> index_names(const std::vector<std::string>& names, const std::string& file,
                                                   const char* what) {
  std::map<std::string, Id, std::less<>> m;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!m.emplace(names[i], make_id<Id>(i)).second) {
      throw ParseError(file, 0, "", std::string("duplicate ") + what + " '" + names[i] + "'");
    }
  }
  return m;
}

json type_table_json(const TypeTable& types) {
  json arr = json::array();
  for (const auto& t : types.types()) {
    json succ = json::array();
    for (TypeId s : t.successors) succ.push_back(types[s].name);
    // Numbers go through format_double so the file is stable and exact.
    arr.push_back({{"name", t.name},
                   {"capacity", json::parse(format_double(t.capacity))},
                   {"radius_km", json::parse(format_double(t.radius_km))},
                   {"cost", json::parse(format_double(t.cost))},
                   {"successors", succ}});
  }
  return arr;
}

TypeTable type_table_from(const json& j, const std::string& file) {
  if (!j.contains("types") || !j["types"].is_array()) throw ParseError(file, 0, "types", "missing type list");
  std::vector<std::string> names;
  for (const auto& t : j["types"]) {
    if (!t.contains("name") || !t["name"].is_string()) throw ParseError(file, 0, "types.name", "type without a name");
    names.push_back(t["name"].get<std::string>());
  }
  const auto by_name = index_names<TypeId>(names, file, "type");
  std::vector<StationType> types;
  for (const auto& t : j["types"]) {
    StationType st;
    st.name = t["name"].get<std::string>();
    for (const char* key : {"capacity", "radius_km", "cost"}) {
      if (!t.contains(key) || !t[key].is_number()) {
        throw ParseError(file, 0, std::string("types.") + key, "type '" + st.name + "' needs a numeric " + key);
      }
    }
    st.capacity = t["capacity"].get<double>();
    st.radius_km = t["radius_km"].get<double>();
    st.cost = t["cost"].get<double>();
    if (t.contains("successors")) {
      for (const auto& s : t["successors"]) {
        const std::string n = s.get<std::string>();
        auto it = by_name.find(n);
        if (it == by_name.end()) throw ParseError(file, 0, "types.successors", "unknown successor '" + n + "'");
        st.successors.push_back(it->second);
      }
    }
    types.push_back(std::move(st));
  }
  const std::string off = j.value("off_type", std::string("off"));
  auto it = by_name.find(off);
  if (it == by_name.end()) throw ParseError(file, 0, "off_type", "off type '" + off + "' is not in the type list");
  return TypeTable(std::move(types), it->second);
}

void require_plain(const std::string& s, const char* what) {
  if (!plain_field(s)) throw std::invalid_argument(std::string(what) + " '" + s + "' cannot be written to CSV");
}

}  // namespace

ParseError::ParseError(std::string file, std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(where(file, line, field) + ": " + message),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

TypeTable parse_type_table(const std::string& json_text, const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, "", e.what());
  }
  return type_table_from(j, source);
}

Scenario load_scenario(const fs::path& dir) {
  ScenarioInput in;
  json meta;
  try {
    meta = json::parse(read_file(dir / "meta.json"));
  } catch (const json::parse_error& e) {
    throw ParseError("meta.json", 0, "", e.what());
  }
  try {
    in.horizon = meta.at("horizon").get<Period>();
    in.change_rate = meta.at("change_rate").get<int>();
    in.h_max = meta.at("h_max").get<double>();
    in.phi = meta.at("phi").get<double>();
    in.operators = meta.at("operators").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError("meta.json", 0, "", e.what());
  }
  in.types = type_table_from(meta, "meta.json");
  std::vector<std::string> type_names;
  for (const auto& t : in.types.types()) type_names.push_back(t.name);
  const auto types = index_names<TypeId>(type_names, "meta.json", "type");
  const auto ops = index_names<OperatorId>(in.operators, "meta.json", "operator");

  const Csv st = read_csv(dir / "stations.csv", {"id", "x", "y", "initial_type", "owner", "allowed_types"});
  std::vector<std::string> station_names;
  for (const auto& [line, f] : st.rows) {
    BaseStation b;
    b.name = f[0];
    b.x = number(st, line, 1, f[1]);
    b.y = number(st, line, 2, f[2]);
    b.initial = lookup(types, st, line, 3, f[3], "type");
    b.owner = lookup(ops, st, line, 4, f[4], "operator");
    for (auto part : split_fields(f[5], ';')) b.allowed.push_back(lookup(types, st, line, 5, std::string(part), "type"));
    station_names.push_back(b.name);
    in.stations.push_back(std::move(b));
  }
  const auto stations = index_names<StationId>(station_names, st.file, "station");

  const Csv cl = read_csv(dir / "clusters.csv", {"id", "x", "y"});
  std::vector<std::string> cluster_names;
  for (const auto& [line, f] : cl.rows) {
    in.clusters.push_back({f[0], number(cl, line, 1, f[1]), number(cl, line, 2, f[2])});
    cluster_names.push_back(f[0]);
  }
  const auto clusters = index_names<ClusterId>(cluster_names, cl.file, "cluster");

  const Csv dm = read_csv(dir / "demand.csv", {"cluster", "period", "operator", "traffic"});
  const std::size_t K = in.horizon > 0 ? static_cast<std::size_t>(in.horizon) : 0;
  const std::size_t O = in.operators.size();
  in.demand.assign(in.clusters.size() * K * O, 0.0);
  std::vector<char> seen(in.demand.size(), 0);
  for (const auto& [line, f] : dm.rows) {
    const ClusterId c = lookup(clusters, dm, line, 0, f[0], "cluster");
    const auto k = parse_long(f[1]);
    if (!k || *k < 1 || *k > in.horizon) throw ParseError(dm.file, line, "period", "period '" + f[1] + "' outside [1, K]");
    const OperatorId o = lookup(ops, dm, line, 2, f[2], "operator");
    const std::size_t i = (idx(c) * K + static_cast<std::size_t>(*k - 1)) * O + idx(o);
    if (seen[i]) throw ParseError(dm.file, line, "", "duplicate demand cell (" + f[0] + ", " + f[1] + ", " + f[2] + ")");
    seen[i] = 1;
    in.demand[i] = number(dm, line, 3, f[3]);
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i]) continue;
    const std::size_t o = i % O;
    const std::size_t k = (i / O) % K + 1;
    const std::size_t c = i / O / K;
    throw ParseError(dm.file, 0, "",
                     "missing demand cell (" + in.clusters[c].name + ", " + std::to_string(k) + ", " + in.operators[o] + ")");
  }

  if (fs::exists(dir / "costs.csv")) {
    const Csv co = read_csv(dir / "costs.csv", {"station", "type", "cost"});
    for (const auto& [line, f] : co.rows) {
      in.cost_overrides.push_back({lookup(stations, co, line, 0, f[0], "station"), lookup(types, co, line, 1, f[1], "type"),
                                   number(co, line, 2, f[2])});
    }
  }
  try {
    return Scenario(std::move(in));
  } catch (const std::invalid_argument& e) {
    throw ParseError(dir.filename().string(), 0, "", e.what());
  }
}

void save_scenario(const Scenario& sc, const fs::path& dir) {
  const TypeTable& types = sc.types();
  for (const auto& t : types.types()) require_plain(t.name, "type name");
  for (const auto& o : sc.operators()) require_plain(o, "operator name");
  for (const auto& s : sc.stations()) require_plain(s.name, "station name");
  for (const auto& c : sc.clusters()) require_plain(c.name, "cluster name");
  fs::create_directories(dir);

  json meta = {{"horizon", sc.horizon()},
               {"change_rate", sc.change_rate()},
               {"h_max", json::parse(format_double(sc.h_max()))},
               {"phi", json::parse(format_double(sc.phi()))},
               {"operators", sc.input().operators},
               {"off_type", types[types.off()].name},
               {"types", type_table_json(types)}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  std::string out = "id,x,y,initial_type,owner,allowed_types\n";
  for (const auto& s : sc.stations()) {
    std::string allowed;
    for (TypeId t : s.allowed) allowed += (allowed.empty() ? "" : ";") + types[t].name;
    out += s.name + "," + format_double(s.x) + "," + format_double(s.y) + "," + types[s.initial].name + "," +
           sc.operators()[idx(s.owner)] + "," + allowed + "\n";
  }
  write_file(dir / "stations.csv", out);

  out = "id,x,y\n";
  for (const auto& c : sc.clusters()) out += c.name + "," + format_double(c.x) + "," + format_double(c.y) + "\n";
  write_file(dir / "clusters.csv", out);

  out = "cluster,period,operator,traffic\n";
  for (std::size_t c = 0; c < sc.num_clusters(); ++c) {
    for (Period k = 1; k <= sc.horizon(); ++k) {
      for (std::size_t o = 0; o < sc.num_operators(); ++o) {
        out += sc.clusters()[c].name + "," + std::to_string(k) + "," + sc.operators()[o] + "," +
               format_double(sc.demand(make_id<ClusterId>(c), k, make_id<OperatorId>(o))) + "\n";
      }
    }
  }
  write_file(dir / "demand.csv", out);

  const fs::path costs = dir / "costs.csv";
  if (sc.input().cost_overrides.empty()) {
    fs::remove(costs);
  } else {
    out = "station,type,cost\n";
    for (const auto& o : sc.input().cost_overrides) {
      out += sc.station(o.station).name + "," + types[o.type].name + "," + format_double(o.cost) + "\n";
    }
    write_file(costs, out);
  }
}

}  // namespace evoplan
