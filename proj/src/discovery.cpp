#include "koopman/discovery.hpp"

namespace koopman {

std::string to_string(DictionaryPolicy policy) {
    return policy == DictionaryPolicy::keep ? "keep" : "reseed";
}

DictionaryPolicy dictionary_policy_from_string(const std::string& s) {
    if (s == "keep") return DictionaryPolicy::keep;
    if (s == "reseed") return DictionaryPolicy::reseed;
    throw ValidationError("unknown dictionary policy '" + s + "'");
}

double estimate_epsilon(const KoopmanModel& model, const std::vector<Trajectory>& training,
                        long n, double safety) {
    if (training.empty()) throw ValidationError("estimate_epsilon: empty training set");
    if (safety < 1.0) throw ValidationError("estimate_epsilon: safety must be >= 1");
    if (n < 1) throw ValidationError("estimate_epsilon: n must be >= 1");
    double worst = 0.0;
    for (const auto& t : training) worst = std::max(worst, learning_error(model, t, n));
    return safety * worst;
}

namespace {

Mat all_snapshots(const std::vector<Trajectory>& trajectories) {
    Index total = 0;
    for (const auto& t : trajectories) total += t.length();
    Mat snaps(trajectories.front().states.rows(), total);
    Index col = 0;
    for (const auto& t : trajectories) {
        snaps.middleCols(col, t.length()) = t.states;
        col += t.length();
    }
    return snaps;
}

KoopmanModel refit(const std::vector<Trajectory>& trajectories, const Dictionary& current,
                   const DiscoveryOptions& opts) {
    Dictionary dict = current;
    if (opts.policy == DictionaryPolicy::reseed || dict.size() == 0) {
        dict = build_dictionary(DictionaryKind::gaussian_rbf, all_snapshots(trajectories),
                                opts.n_centers, opts.sigma, opts.dict_seed, opts.constant);
    }
    return fit(build_pairs(trajectories), dict, opts.rel_tol, "discovered");
}

}  // namespace

DiscoveryState initialize_discovery(const std::vector<Trajectory>& initial,
                                    const DiscoveryOptions& options) {
    if (initial.empty()) throw ValidationError("initialize_discovery: empty initial subset");
    DiscoveryState state;
    state.options = options;
    state.accepted = initial;
    state.model = refit(state.accepted, Dictionary{}, options);
    state.epsilon = estimate_epsilon(state.model, state.accepted, options.horizon, options.safety);
    state.initial_multiplicity =
        unit_multiplicity(decompose(state.model, options.unit_tol), options.rank_tol);
    return state;
}

NoveltyVerdict novelty_test(const DiscoveryState& state, const Trajectory& trajectory, long n) {
    NoveltyVerdict verdict;
    verdict.horizon = n;
    verdict.threshold = state.epsilon;
    if (n == 0) {
        verdict.degenerate_horizon = true;  // error is identically zero at n = 0
        return verdict;
    }
    verdict.observed_error = learning_error(state.model, trajectory, n);
    verdict.is_novel = verdict.observed_error > state.epsilon;
    return verdict;
}

DiscoveryState incorporate(DiscoveryState state, const Trajectory& trajectory) {
    const NoveltyVerdict verdict = novelty_test(state, trajectory, state.options.horizon);
    state.accepted.push_back(trajectory);

    DiscoveryEvent ev;
    ev.traj_id = trajectory.id;
    ev.epsilon = state.epsilon;
    ev.observed_error = verdict.observed_error;

    if (verdict.is_novel) {
        state.model = refit(state.accepted, state.model.dictionary, state.options);
        state.epsilon = estimate_epsilon(state.model, state.accepted, state.options.horizon,
                                         state.options.safety);
        ev.event = "refit";
        ev.epsilon = state.epsilon;
    } else {
        ev.event = "accepted";
    }
    ev.multiplicity =
        unit_multiplicity(decompose(state.model, state.options.unit_tol), state.options.rank_tol);
    state.history.push_back(std::move(ev));
    return state;
}

DiscoveryState run_discovery(const std::vector<Trajectory>& stream,
                             const std::vector<Trajectory>& initial,
                             const DiscoveryOptions& options) {
    DiscoveryState state = initialize_discovery(initial, options);
    for (const auto& trajectory : stream) state = incorporate(std::move(state), trajectory);
    return state;
}

}  // namespace koopman
