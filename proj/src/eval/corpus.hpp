#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval/metrics.hpp"

namespace nmp::eval {

struct TrackPair {
    std::string name;
    std::vector<NoteEvent> ref;
    std::vector<NoteEvent> est;
};

struct EvalReport {
    std::vector<TrackMetrics> per_track;
    double F = 0.0;
    double Fno = 0.0;
    double Acc = 0.0;
    std::vector<std::string> warnings;
};

// Per-track metrics and their unweighted means. Throws ContractError for an
// empty corpus.
EvalReport evaluateCorpus(const std::vector<TrackPair>& tracks, const NoteMatchTolerances& tol = {});

// Pairs `*.csv` files by name across the two directories. Names present on
// only one side are skipped and reported in `warnings`.
EvalReport evaluateDirectories(const std::filesystem::path& refDir, const std::filesystem::path& estDir,
                               const NoteMatchTolerances& tol = {});

nlohmann::json reportToJson(const EvalReport& report);

} // namespace nmp::eval
