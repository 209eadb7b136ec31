#include "adaptopt/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace adaptopt {

void check_invariant(bool ok, const char* name, const std::string& detail) {
  if (!ok) throw InvariantError(name, detail);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + text + "' is not a number");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::size_t to_count(const std::string& key, double v) {
  if (v < 0.0 || v != std::floor(v) || v > 9.0e15) {
    throw std::invalid_argument("config key '" + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos || trim(body.substr(0, eq)).empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    cfg.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || trim(assignment.substr(0, eq)).empty()) {
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool Config::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  const std::string v = it == values_.end() ? fallback : it->second;
  resolved_[key] = v;
  return v;
}

double Config::number(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  const double v = it == values_.end() ? fallback : to_number(key, it->second);
  resolved_[key] = format_double(v);
  return v;
}

std::size_t Config::count(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  const std::size_t v = it == values_.end() ? fallback : to_count(key, to_number(key, it->second));
  resolved_[key] = std::to_string(v);
  return v;
}

std::uint64_t Config::u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  std::uint64_t v = fallback;
  if (it != values_.end()) {
    try {
      std::size_t used = 0;
      v = std::stoull(it->second, &used, 0);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key + "' must be an unsigned integer");
    }
  }
  resolved_[key] = std::to_string(v);
  return v;
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  bool v = fallback;
  if (it != values_.end()) {
    const std::string& s = it->second;
    if (s == "1" || s == "true" || s == "yes" || s == "on") {
      v = true;
    } else if (s == "0" || s == "false" || s == "no" || s == "off") {
      v = false;
    } else {
      throw std::invalid_argument("config key '" + key + "' must be a boolean");
    }
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::vector<double> Config::numbers(const std::string& key,
                                    const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  std::vector<double> v = fallback;
  if (it != values_.end()) {
    v.clear();
    for (const std::string& item : split_list(it->second)) v.push_back(to_number(key, item));
  }
  std::string echo;
  for (std::size_t i = 0; i < v.size(); ++i) echo += (i ? "," : "") + format_double(v[i]);
  resolved_[key] = echo;
  return v;
}

std::vector<std::size_t> Config::counts(const std::string& key,
                                        const std::vector<std::size_t>& fallback) const {
  const auto it = values_.find(key);
  std::vector<std::size_t> v = fallback;
  if (it != values_.end()) {
    v.clear();
    for (const std::string& item : split_list(it->second)) {
      v.push_back(to_count(key, to_number(key, item)));
    }
  }
  std::string echo;
  for (std::size_t i = 0; i < v.size(); ++i) echo += (i ? "," : "") + std::to_string(v[i]);
  resolved_[key] = echo;
  return v;
}

std::map<std::string, std::string, std::less<>> Config::section(const std::string& prefix) const {
  std::map<std::string, std::string, std::less<>> out;
  const std::string head = prefix + ".";
  for (const auto& [key, value] : values_) {
    if (key.rfind(head, 0) == 0) {
      out[key.substr(head.size())] = value;
      resolved_[key] = value;
    }
  }
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (resolved_.find(key) == resolved_.end()) out.push_back(key);
  }
  return out;
}

void Config::reject_unused() const {
  const auto unused = unused_keys();
  if (!unused.empty()) throw std::invalid_argument("unknown config key '" + unused.front() + "'");
}

// ---------------------------------------------------------------------------

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
  rows.push_back(std::move(row));
}

void Table::write(std::ostream& out) const {
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
    out << '\n';
  }
}

void Report::write_preamble(std::ostream& out) const {
  out << "# " << kVersion << '\n';
  out << "# experiment=" << experiment << '\n';
  for (const auto& [key, value] : config) out << "# " << key << '=' << value << '\n';
}

void Report::write_trials(std::ostream& out) const {
  write_preamble(out);
  trials.write(out);
}

void Report::write_summary(std::ostream& out) const {
  write_preamble(out);
  summary.write(out);
}

void Report::save(const std::string& path) const {
  std::ofstream trials_out(path);
  if (!trials_out) throw std::runtime_error("cannot write '" + path + "'");
  write_trials(trials_out);
  std::ofstream summary_out(path + ".summary.csv");
  if (!summary_out) throw std::runtime_error("cannot write '" + path + ".summary.csv'");
  write_summary(summary_out);
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace adaptopt
