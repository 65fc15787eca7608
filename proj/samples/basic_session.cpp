// Minimal two-party walkthrough: key generation, asynchronous session
// establishment through a prekey bundle, a few ratcheted messages, and the
// matching safety numbers at the end.

#include <iostream>

#include "ratchetlab/ratchetlab.hpp"

using namespace ratchetlab;

int main() {
    SystemRandom rng;

    KeyStore alice = KeyStore::generate("+15550000001", 10, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 10, rng);

    // Alice fetches Bob's bundle (here: directly) and opens the session.
    PreKeyBundle bundle = bob.public_bundle(true);
    InitiationResult init = initiate_session(alice, bundle, rng);
    SessionState alice_session = std::move(init.session);

    MessageEnvelope first = encrypt_message(alice_session, to_bytes("hi bob, it's alice"));
    std::cout << "first envelope: " << first.encode().size() << " bytes (carries the handshake)\n";

    // Bob accepts from the handshake header riding on the first message.
    SessionState bob_session = accept_session(bob, *first.handshake, first.sender_id);
    std::cout << "bob reads:      " << to_string(decrypt_message(bob_session, first)) << "\n";

    MessageEnvelope reply = encrypt_message(bob_session, to_bytes("hey alice"));
    std::cout << "alice reads:    " << to_string(decrypt_message(alice_session, reply)) << "\n";

    MessageEnvelope second = encrypt_message(alice_session, to_bytes("ratchet moved on"));
    std::cout << "second envelope: " << second.encode().size() << " bytes (no handshake anymore)\n";
    std::cout << "bob reads:      " << to_string(decrypt_message(bob_session, second)) << "\n";

    std::string number = safety_number("+15550000001", alice.identity().dh.public_key,
                                       "+15550000002", bob.identity().dh.public_key);
    std::cout << "safety number:  " << number << "\n";
    return 0;
}
