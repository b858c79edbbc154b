#include "eval/corpus.hpp"

#include <algorithm>
#include <set>

#include "common/errors.hpp"
#include "tracking/note_io.hpp"

namespace nmp::eval {

namespace fs = std::filesystem;

EvalReport evaluateCorpus(const std::vector<TrackPair>& tracks, const NoteMatchTolerances& tol)
{
    if (tracks.empty())
        throw ContractError("evaluate: corpus has no tracks");
    EvalReport report;
    for (const TrackPair& t : tracks) {
        TrackMetrics m = evaluateTrack(t.ref, t.est, tol);
        m.name = t.name;
        report.F += m.F();
        report.Fno += m.Fno();
        report.Acc += m.acc;
        report.per_track.push_back(std::move(m));
    }
    const double n = double(tracks.size());
    report.F /= n;
    report.Fno /= n;
    report.Acc /= n;
    return report;
}

namespace {

std::set<std::string> csvNames(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw IoError("not a directory: " + dir.string());
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            names.insert(entry.path().filename().string());
    return names;
}

} // namespace

EvalReport evaluateDirectories(const fs::path& refDir, const fs::path& estDir, const NoteMatchTolerances& tol)
{
    const auto refNames = csvNames(refDir);
    const auto estNames = csvNames(estDir);
    std::vector<TrackPair> tracks;
    std::vector<std::string> warnings;
    for (const std::string& name : refNames) {
        if (!estNames.count(name)) {
            warnings.push_back("no estimate for " + name);
            continue;
        }
        tracks.push_back({fs::path(name).stem().string(), tracking::readNotesCsv(refDir / name),
                          tracking::readNotesCsv(estDir / name)});
    }
    for (const std::string& name : estNames)
        if (!refNames.count(name))
            warnings.push_back("no reference for " + name);
    EvalReport report = evaluateCorpus(tracks, tol);
    report.warnings = std::move(warnings);
    return report;
}

nlohmann::json reportToJson(const EvalReport& report)
{
    nlohmann::json tracks = nlohmann::json::array();
    for (const TrackMetrics& m : report.per_track) {
        tracks.push_back({
            {"name", m.name},
            {"F", m.F()},
            {"Fno", m.Fno()},
            {"Acc", m.acc},
            {"precision", m.with_offset.precision},
            {"recall", m.with_offset.recall},
            {"precision_no_offset", m.no_offset.precision},
            {"recall_no_offset", m.no_offset.recall},
            {"n_ref", m.n_ref},
            {"n_est", m.n_est},
        });
    }
    return {
        {"per_track", tracks},
        {"mean", {{"F", report.F}, {"Fno", report.Fno}, {"Acc", report.Acc}}},
        {"warnings", report.warnings},
    };
}

} // namespace nmp::eval
