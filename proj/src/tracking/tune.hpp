#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "model/posteriorgrams.hpp"
#include "tracking/note_tracker.hpp"

namespace nmp::tracking {

struct TuneCase {
    std::string name;
    model::Posteriorgrams posteriors;
    std::vector<NoteEvent> reference;
};

struct TuneResult {
    double threshold = 0.5;
    double mean_fno = 0.0;
    std::vector<std::pair<double, double>> curve; // (threshold, mean Fno)
};

std::vector<double> defaultThresholdGrid(); // 0.05, 0.10, ..., 0.95

// Grid search for the note threshold maximising mean Fno; ties go to the
// lower threshold. Other tracker settings come from `base`.
TuneResult tuneNoteThreshold(const std::vector<TuneCase>& cases, const TrackerConfig& base = {},
                             const std::vector<double>& grid = defaultThresholdGrid());

// Pairs `<name>.csv` reference notes with `<name>.nmpw` posteriorgrams.
std::vector<TuneCase> loadTuneCases(const std::filesystem::path& refDir, const std::filesystem::path& posteriorsDir,
                                    std::vector<std::string>* warnings = nullptr);

} // namespace nmp::tracking
