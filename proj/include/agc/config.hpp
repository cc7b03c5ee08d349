// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agc/diffusion.hpp"
#include "agc/engine.hpp"
#include "agc/sampling.hpp"
#include "agc/terrain.hpp"

namespace agc {

/// Parses the TOML subset used for run configs: [section] tables, dotted
/// keys, strings, numbers, booleans and flat numeric arrays. Values come back
/// as "section.key" -> raw text (strings unquoted).
std::map<std::string, std::string> parse_toml(std::istream& in, const std::string& source_name = "<config>");

/// Resolved run configuration. Every known key has a value; unknown keys and
/// ill-typed values are rejected when set. paths.data_dir defaults to
/// $AGC_DATA_DIR.
class RunConfig {
public:
    RunConfig();
    static RunConfig from_file(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool is_explicit(const std::string& key) const { return explicit_.count(key) > 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string text(const std::string& key) const;
    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    /// Relative input paths (dem, landcover, function, weather) resolve against
    /// paths.data_dir when set. Outputs stay relative to the working directory.
    std::filesystem::path path(const std::string& key) const;

    ClassTable classes() const;
    DemWindow dem_window() const;
    WeissThresholds weiss() const;
    SamplingConfig sampling() const;
    EngineConfig engine() const;
    NoiseSchedule schedule() const;
    std::uint64_t seed() const;

    /// Builds every typed view so bad values fail before any work starts.
    void validate() const;
    /// Snapshot with sorted keys.
    std::string lock_json() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> explicit_;
};

}  // namespace agc
