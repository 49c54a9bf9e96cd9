#include <benchmark/benchmark.h>

#include <sstream>

#include "bridgesim/pilot.hpp"
#include "bridgesim/session.hpp"
#include "bridgesim/session_log.hpp"

using namespace bridgesim;

namespace {

struct Fixture {
  SessionConfig config;
  ScriptedPilot pilot;
  std::string log;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SessionConfig c;
    c.scenario = load_scenario_file(BRIDGESIM_FIXTURE_DIR "/two_bridge.json");
    c.seed = c.scenario.seed;
    ScriptedPilot p = load_pilot_file(BRIDGESIM_FIXTURE_DIR "/perfect_pilot.json", with_defects_for_seed(c.scenario, c.seed));
    ScriptedPilot run = p;
    std::ostringstream log;
    run_session(c, run, &log);
    return Fixture{c, p, log.str()};
  }();
  return f;
}

void BM_ScriptedSession(benchmark::State& state) {
  const Fixture& f = fixture();
  std::int64_t frames = 0;
  for (auto _ : state) {
    ScriptedPilot p = f.pilot;
    const SessionResult r = run_session(f.config, p);
    frames += r.outcome.frames;
  }
  state.SetItemsProcessed(frames);
}
BENCHMARK(BM_ScriptedSession)->Unit(benchmark::kMillisecond);

void BM_ScriptedSessionWithLog(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    ScriptedPilot p = f.pilot;
    std::ostringstream log;
    benchmark::DoNotOptimize(run_session(f.config, p, &log));
  }
}
BENCHMARK(BM_ScriptedSessionWithLog)->Unit(benchmark::kMillisecond);

void BM_ParseLog(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(parse_session_log(f.log));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(f.log.size()));
}
BENCHMARK(BM_ParseLog)->Unit(benchmark::kMillisecond);

void BM_Replay(benchmark::State& state) {
  const SessionLog log = parse_session_log(fixture().log);
  for (auto _ : state) benchmark::DoNotOptimize(replay(log));
}
BENCHMARK(BM_Replay)->Unit(benchmark::kMillisecond);

}  // namespace
