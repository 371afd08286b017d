#pragma once

#include <cstdint>
#include <string>

#include "lbt/game/game_spec.hpp"
#include "lbt/session/hub.hpp"
#include "lbt/sim/tutor_sim.hpp"

namespace lbt::sim {

struct WireTutorResult {
  std::size_t events_sent = 0;
  std::size_t messages_read = 0;
  std::int64_t ended_at_ms = 0;
};

// Plays the tutor's side of one hub session through the wire protocol only:
// reads the session's to_ui envelopes and answers with from_client
// envelopes stamped on its own virtual clock, starting at start_ms. The
// outcome depends only on the session, the profile and the seed, never on
// what other threads do to other sessions. Test answers are uniform
// guesses (answer keys never reach clients).
WireTutorResult run_wire_tutor(session::Hub& hub, const std::string& session_id, const game::GameSpec& game,
                               const TutorProfile& profile, std::uint64_t seed, std::int64_t start_ms);

}  // namespace lbt::sim
