#pragma once

#include <span>

#include "evocounsel/client/card.hpp"
#include "evocounsel/gateway/call_context.hpp"
#include "evocounsel/gateway/chat.hpp"
#include "evocounsel/memory/transcript.hpp"

namespace evocounsel::client {

/// Persona-prompted stand-in for a real client. Produces the next client turn
/// given the session so far; `end_signal` ends the session and the optional
/// `self_report` carries affect scores (e.g. negative_affect, positive_affect).
memory::ClientTurn simulate_client_turn(gateway::Backend& backend, const ClientProfileCard& card,
                                        std::span<const memory::Turn> history,
                                        const gateway::CallContext& call = {},
                                        const gateway::TaskOptions& options = {});

/// System prompt built from the card.
std::string persona_prompt(const ClientProfileCard& card);

}  // namespace evocounsel::client
