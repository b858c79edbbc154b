#include "eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace nmp::eval {

void NoteMatchTolerances::validate() const
{
    if (!(onset_tol > 0.0 && pitch_tol > 0.0 && offset_ratio > 0.0 && offset_min_tol > 0.0))
        throw ContractError("note match tolerances must be positive");
}

namespace {

double roundDistance(double d)
{
    return std::nearbyint(d * 1e4) / 1e4;
}

} // namespace

bool notesCompatible(const NoteEvent& ref, const NoteEvent& est, const NoteMatchTolerances& tol, bool useOffsets)
{
    if (std::abs(double(ref.pitch_midi - est.pitch_midi)) > tol.pitch_tol)
        return false;
    if (roundDistance(std::abs(ref.onset_s - est.onset_s)) > tol.onset_tol)
        return false;
    if (useOffsets) {
        const double offsetTol = std::max(tol.offset_ratio * (ref.offset_s - ref.onset_s), tol.offset_min_tol);
        if (roundDistance(std::abs(ref.offset_s - est.offset_s)) > offsetTol)
            return false;
    }
    return true;
}

std::vector<std::pair<std::size_t, std::size_t>> matchNotes(const std::vector<NoteEvent>& ref,
                                                            const std::vector<NoteEvent>& est,
                                                            const NoteMatchTolerances& tol, bool useOffsets)
{
    tol.validate();
    const std::size_t nr = ref.size();
    const std::size_t ne = est.size();
    std::vector<std::vector<std::size_t>> adj(nr);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t e = 0; e < ne; ++e)
            if (notesCompatible(ref[r], est[e], tol, useOffsets))
                adj[r].push_back(e);

    constexpr std::size_t kNone = std::size_t(-1);
    std::vector<std::size_t> estMate(ne, kNone);
    std::vector<std::size_t> visitedStamp(ne, 0);
    std::size_t stamp = 0;

    // Kuhn's augmenting paths with an explicit stack; recursion depth could
    // otherwise reach the number of notes.
    struct Frame {
        std::size_t r;
        std::size_t next;
    };
    std::vector<Frame> stack;
    std::vector<std::size_t> via; // est node chosen at each stack level
    for (std::size_t root = 0; root < nr; ++root) {
        ++stamp;
        stack.assign(1, {root, 0});
        via.clear();
        bool augmented = false;
        while (!stack.empty() && !augmented) {
            Frame& f = stack.back();
            if (f.next == adj[f.r].size()) {
                stack.pop_back();
                if (!via.empty())
                    via.pop_back();
                continue;
            }
            const std::size_t e = adj[f.r][f.next++];
            if (visitedStamp[e] == stamp)
                continue;
            visitedStamp[e] = stamp;
            via.push_back(e);
            if (estMate[e] == kNone) {
                augmented = true;
            } else {
                stack.push_back({estMate[e], 0});
            }
        }
        if (!augmented)
            continue;
        // stack[i].r is matched to via[i] along the path.
        for (std::size_t i = 0; i < via.size(); ++i)
            estMate[via[i]] = stack[i].r;
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t e = 0; e < ne; ++e)
        if (estMate[e] != kNone)
            pairs.emplace_back(estMate[e], e);
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

} // namespace nmp::eval
