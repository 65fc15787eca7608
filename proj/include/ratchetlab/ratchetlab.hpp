#pragma once

// Umbrella header for the ratchetlab library.

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/crypto.hpp"
#include "ratchetlab/errors.hpp"
#include "ratchetlab/key_store.hpp"
#include "ratchetlab/metadata.hpp"
#include "ratchetlab/metadata_analysis.hpp"
#include "ratchetlab/random.hpp"
#include "ratchetlab/ratchet.hpp"
#include "ratchetlab/server.hpp"
#include "ratchetlab/session.hpp"
#include "ratchetlab/simulation.hpp"
#include "ratchetlab/verification.hpp"
