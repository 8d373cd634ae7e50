#include "beaconsim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace beaconsim {

nlohmann::json Config::to_document() const {
  nlohmann::json doc;
  doc["params"] = params;
  nlohmann::json runj = run;
  doc["scenario"] = runj.at("scenario");
  runj.erase("scenario");
  doc["run"] = runj;
  return doc;
}

Config Config::from_document(const nlohmann::json& doc) {
  Config cfg;
  if (doc.contains("params")) cfg.params = doc.at("params").get<SimParams>();
  nlohmann::json runj = doc.contains("run") ? doc.at("run") : nlohmann::json::object();
  if (doc.contains("scenario")) runj["scenario"] = doc.at("scenario");
  cfg.run = runj.get<RunConfig>();
  return cfg;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> keys;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) keys.push_back(part);
  if (keys.empty()) throw std::invalid_argument("empty override path");

  nlohmann::json* node = &doc;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->contains(keys[i]))
      throw std::invalid_argument("override path not found: " + path);
    node = &(*node)[keys[i]];
  }
  const std::string& leaf = keys.back();
  if (!node->contains(leaf))
    throw std::invalid_argument("override key not found: " + path);

  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // plain string value
  (*node)[leaf] = parsed;
}

namespace {

void merge_into(nlohmann::json& base, const nlohmann::json& user) {
  if (!base.is_object() || !user.is_object()) {
    base = user;
    return;
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (base.contains(it.key()))
      merge_into(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

}  // namespace

Config config_from_json_text(const std::string& text,
                             const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::parse(text);
  // Manifests carry the resolved config under "resolved_config".
  if (doc.contains("resolved_config")) doc = doc.at("resolved_config");
  // Resolve against the full default document so that overrides can address
  // any schema key, not only those present in the file.
  nlohmann::json full = Config{}.to_document();
  merge_into(full, doc);
  for (const auto& o : overrides) apply_override(full, o);
  return Config::from_document(full);
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str(), overrides);
}

std::string steps_csv(const RunResult& result) {
  std::ostringstream os;
  os << "step,time,vehicle,x,y,rate,price,cbt,rx_count\n";
  os.precision(10);
  for (const auto& st : result.steps) {
    for (const auto& row : st.rows) {
      os << st.step << ',' << st.time << ',' << row.vehicle << ',' << row.x << ','
         << row.y << ',' << row.rate << ',' << row.price << ',' << row.offered_cbt
         << ',' << row.rx_count << '\n';
    }
  }
  return os.str();
}

std::string oracle_csv(std::span<const double> xs, std::span<const double> rates,
                       std::span<const double> prices) {
  std::ostringstream os;
  os << "vehicle,x,rate,price\n";
  os.precision(12);
  for (std::size_t v = 0; v < rates.size(); ++v) {
    os << v << ',' << (v < xs.size() ? xs[v] : 0.0) << ',' << rates[v] << ','
       << (v < prices.size() ? prices[v] : 0.0) << '\n';
  }
  return os.str();
}

}  // namespace beaconsim
