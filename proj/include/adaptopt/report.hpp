#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adaptopt {

inline constexpr std::string_view kVersion = "adaptopt 0.1.0";

/// Raised by experiment runners when a checked invariant fails.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(std::string name, const std::string& detail)
      : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Throws InvariantError(name, detail) unless `ok`.
void check_invariant(bool ok, const char* name, const std::string& detail);

/// Round-trip formatting (%.17g).
std::string format_double(double v);

/// Line-oriented key=value configuration with command-line overrides.
///
/// Every lookup records the effective value (given or default) so the resolved
/// configuration can be echoed into reports; keys that were given but never
/// looked up are reported by unused_keys().
class Config {
 public:
  /// Parses `key = value` lines; '#' starts a comment. Throws on malformed lines.
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  /// Parses a `key=value` override.
  void set_assignment(std::string_view assignment);
  bool has(std::string_view key) const;

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::size_t> counts(const std::string& key,
                                  const std::vector<std::size_t>& fallback) const;
  /// All given keys with the prefix `prefix.`, with the prefix removed.
  std::map<std::string, std::string, std::less<>> section(const std::string& prefix) const;

  std::vector<std::string> unused_keys() const;
  /// Throws std::invalid_argument naming the first unused key.
  void reject_unused() const;
  /// Resolved key/value pairs in key order.
  const std::map<std::string, std::string, std::less<>>& resolved() const { return resolved_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
  mutable std::map<std::string, std::string, std::less<>> resolved_;
};

/// A CSV table of preformatted cells.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  void write(std::ostream& out) const;
};

/// Per-trial table plus summary, with the resolved configuration echoed as
/// `# key=value` comment lines after a version line.
struct Report {
  std::string experiment;
  std::map<std::string, std::string, std::less<>> config;
  Table trials;
  Table summary;

  void write_preamble(std::ostream& out) const;
  void write_trials(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
  /// Writes `path` (trials) and `path.summary.csv`.
  void save(const std::string& path) const;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
/// Results must be written by index; the first exception is rethrown after joining.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace adaptopt
