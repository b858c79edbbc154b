#include "tracking/tune.hpp"

#include <set>

#include "common/errors.hpp"
#include "eval/metrics.hpp"
#include "tracking/note_io.hpp"

namespace nmp::tracking {

namespace fs = std::filesystem;

std::vector<double> defaultThresholdGrid()
{
    std::vector<double> grid;
    for (int k = 1; k <= 19; ++k)
        grid.push_back(k / 20.0);
    return grid;
}

TuneResult tuneNoteThreshold(const std::vector<TuneCase>& cases, const TrackerConfig& base,
                             const std::vector<double>& grid)
{
    if (cases.empty())
        throw ContractError("tune: validation set is empty");
    if (grid.empty())
        throw ContractError("tune: threshold grid is empty");
    TuneResult result;
    bool first = true;
    for (double tau : grid) {
        TrackerConfig cfg = base;
        cfg.note_threshold = tau;
        double sum = 0.0;
        for (const TuneCase& c : cases)
            sum += eval::noteScores(c.reference, noteEvents(c.posteriors, cfg), {}, false).f;
        const double mean = sum / double(cases.size());
        result.curve.emplace_back(tau, mean);
        if (first || mean > result.mean_fno || (mean == result.mean_fno && tau < result.threshold)) {
            result.threshold = tau;
            result.mean_fno = mean;
            first = false;
        }
    }
    return result;
}

std::vector<TuneCase> loadTuneCases(const fs::path& refDir, const fs::path& posteriorsDir,
                                    std::vector<std::string>* warnings)
{
    for (const fs::path& dir : {refDir, posteriorsDir})
        if (!fs::is_directory(dir))
            throw IoError("not a directory: " + dir.string());
    std::set<fs::path> refs;
    for (const auto& entry : fs::directory_iterator(refDir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            refs.insert(entry.path());
    std::vector<TuneCase> cases;
    for (const fs::path& ref : refs) {
        const std::string stem = ref.stem().string();
        const fs::path post = posteriorsDir / (stem + ".nmpw");
        if (!fs::exists(post)) {
            if (warnings)
                warnings->push_back("no posteriorgrams for " + ref.filename().string());
            continue;
        }
        cases.push_back({stem, model::loadPosteriors(post), readNotesCsv(ref)});
    }
    if (warnings) {
        std::set<fs::path> posts;
        for (const auto& entry : fs::directory_iterator(posteriorsDir))
            if (entry.is_regular_file() && entry.path().extension() == ".nmpw")
                posts.insert(entry.path());
        for (const fs::path& post : posts)
            if (!fs::exists(refDir / (post.stem().string() + ".csv")))
                warnings->push_back("no reference for " + post.filename().string());
    }
    return cases;
}

} // namespace nmp::tracking
