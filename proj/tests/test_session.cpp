#include <catch2/catch_amalgamated.hpp>

#include "ratchetlab/key_store.hpp"
#include "ratchetlab/ratchet.hpp"
#include "ratchetlab/session.hpp"

using namespace ratchetlab;

TEST_CASE("derive_chains known answer (all-0x42 master, frozen from oracle script)") {
    Bytes master(128, 0x42);
    DerivedChains c = derive_chains(master);
    CHECK(hex_encode(c.root) == "ac7146fd64cad8967c9f4dea0b24883781adcae936aa0f57866f05ec5ef81750");
    CHECK(hex_encode(c.chain_a) == "b9ad50ce595741fe3a3cb8aebe234d3845ce34770088aa26143777e1e34fb449");
    CHECK(hex_encode(c.chain_b) == "bc51f0e31c20244ddeb592389ad5ae2ffc70010b3182d74653d6087250cf1de3");

    // determinism and distinctness
    DerivedChains again = derive_chains(master);
    CHECK(again.root == c.root);
    CHECK(again.chain_a == c.chain_a);
    CHECK(again.chain_b == c.chain_b);

    Bytes other(96, 0x42);
    DerivedChains c96 = derive_chains(other);
    CHECK(c96.root != c.root);
    CHECK(c96.chain_a != c.chain_a);
    CHECK(c96.chain_b != c.chain_b);
    CHECK(c.root != c.chain_a);
    CHECK(c.chain_a != c.chain_b);

    CHECK_THROWS_AS(derive_chains(Bytes(64, 0x42)), ValidationError);
    CHECK_THROWS_AS(derive_chains(Bytes(127, 0x42)), ValidationError);
}

TEST_CASE("initiate/accept agree on root and chain keys") {
    DeterministicRandom rng(20);
    KeyStore alice = KeyStore::generate("+15550000001", 4, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 4, rng);

    SECTION("full bundle: 4-term master") {
        PreKeyBundle bundle = bob.public_bundle(true);
        REQUIRE(bundle.one_time_prekey.has_value());

        InitiationResult init = initiate_session(alice, bundle, rng);
        CHECK(init.header.one_time_prekey_id.has_value());
        CHECK(init.session.role == Role::initiator);
        REQUIRE(init.session.pending_handshake.has_value());

        SessionState bob_session = accept_session(bob, init.header, alice.user_id());
        CHECK(bob_session.role == Role::recipient);
        CHECK(bob_session.root_key == init.session.root_key);
        CHECK(bob_session.recv_chain.chain_key == init.session.send_chain.chain_key);
        CHECK(bob_session.send_chain.chain_key == init.session.recv_chain.chain_key);
        CHECK(bob_session.send_chain.chain_key != bob_session.recv_chain.chain_key);
    }

    SECTION("exhausted pool: 3-DH fallback still forms a session") {
        KeyStore carol = KeyStore::generate("+15550000003", 0, rng);
        PreKeyBundle bundle = carol.public_bundle(true);
        CHECK_FALSE(bundle.one_time_prekey.has_value());

        InitiationResult init = initiate_session(alice, bundle, rng);
        CHECK_FALSE(init.header.one_time_prekey_id.has_value());

        SessionState carol_session = accept_session(carol, init.header, alice.user_id());
        CHECK(carol_session.root_key == init.session.root_key);

        // and messages flow
        MessageEnvelope env = encrypt_message(init.session, to_bytes("fallback works"));
        CHECK(to_string(decrypt_message(carol_session, env)) == "fallback works");
    }
}

TEST_CASE("tampered signed-prekey signature refuses the handshake") {
    DeterministicRandom rng(21);
    KeyStore alice = KeyStore::generate("+15550000001", 1, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 1, rng);

    PreKeyBundle bundle = bob.public_bundle(true);
    bundle.signed_prekey_signature[0] ^= 1;
    CHECK_THROWS_AS(initiate_session(alice, bundle, rng), ProtocolError);

    PreKeyBundle swapped = bob.public_bundle(false);
    swapped.identity_public[5] ^= 1;  // identity substitution breaks the binding
    CHECK_THROWS_AS(initiate_session(alice, swapped, rng), ProtocolError);
}

TEST_CASE("one-time prekey single use: replayed handshake header is rejected") {
    DeterministicRandom rng(22);
    KeyStore alice = KeyStore::generate("+15550000001", 2, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 2, rng);

    PreKeyBundle bundle = bob.public_bundle(true);
    InitiationResult init = initiate_session(alice, bundle, rng);
    accept_session(bob, init.header, alice.user_id());

    CHECK_THROWS_AS(accept_session(bob, init.header, alice.user_id()), ReplayError);

    // a fresh bundle consumes a different one-time key
    PreKeyBundle second = bob.public_bundle(true);
    REQUIRE(second.one_time_prekey.has_value());
    CHECK(second.one_time_prekey->first != bundle.one_time_prekey->first);
}

TEST_CASE("corrupted ephemeral key in the header surfaces as first-message MAC failure") {
    DeterministicRandom rng(23);
    KeyStore alice = KeyStore::generate("+15550000001", 1, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 1, rng);

    InitiationResult init = initiate_session(alice, bob.public_bundle(true), rng);
    MessageEnvelope first = encrypt_message(init.session, to_bytes("hello"));

    HandshakeHeader corrupted = *first.handshake;
    corrupted.initiator_ephemeral[7] ^= 0x10;

    SessionState bob_session = accept_session(bob, corrupted, alice.user_id());
    CHECK(bob_session.root_key != init.session.root_key);
    CHECK_THROWS_AS(decrypt_message(bob_session, first), IntegrityError);
}

TEST_CASE("handshake header wire layout round trip") {
    HandshakeHeader h;
    DeterministicRandom rng(24);
    h.initiator_identity_dh = rng.key32();
    h.initiator_identity_signing = rng.key32();
    h.initiator_ephemeral = rng.key32();
    h.signed_prekey_id = 0x01020304;

    SECTION("without one-time id") {
        Bytes wire = h.encode();
        CHECK(wire.size() == HandshakeHeader::kBaseSize);
        CHECK(wire[0] == 0x01);
        CHECK(wire[1] == 0x00);
        CHECK(read_u32_be(wire.data() + 98) == 0x01020304);
        std::size_t off = 0;
        CHECK(HandshakeHeader::decode(wire, off) == h);
        CHECK(off == wire.size());
    }

    SECTION("with one-time id") {
        h.one_time_prekey_id = 0xdeadbeef;
        Bytes wire = h.encode();
        CHECK(wire.size() == HandshakeHeader::kBaseSize + 4);
        CHECK(wire[1] == 0x01);
        CHECK(read_u32_be(wire.data() + 102) == 0xdeadbeef);
        std::size_t off = 0;
        CHECK(HandshakeHeader::decode(wire, off) == h);
    }

    SECTION("malformed headers are rejected") {
        Bytes wire = h.encode();
        std::size_t off = 0;
        Bytes short_wire(wire.begin(), wire.begin() + 10);
        CHECK_THROWS_AS(HandshakeHeader::decode(short_wire, off), IntegrityError);
        wire[0] = 0x02;
        off = 0;
        CHECK_THROWS_AS(HandshakeHeader::decode(wire, off), IntegrityError);
    }
}

TEST_CASE("master key is not retrievable after establishment") {
    DeterministicRandom rng(25);
    KeyStore alice = KeyStore::generate("+15550000001", 1, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 1, rng);

    PreKeyBundle bundle = bob.public_bundle(true);

    // reconstruct the master independently from the private halves
    DhKeyPair probe_eph;  // capture the ephemeral by replaying the rng stream
    {
        DeterministicRandom replay(25);
        KeyStore a2 = KeyStore::generate("+15550000001", 1, replay);
        KeyStore b2 = KeyStore::generate("+15550000002", 1, replay);
        (void)a2;
        (void)b2;
        probe_eph = generate_dh_keypair(replay);
    }
    InitiationResult init = initiate_session(alice, bundle, rng);
    REQUIRE(init.header.initiator_ephemeral == probe_eph.public_key);

    Bytes master;
    append(master, ecdh(alice.identity().dh.secret, bundle.signed_prekey_public));
    append(master, ecdh(probe_eph.secret, bundle.identity_public));
    append(master, ecdh(probe_eph.secret, bundle.signed_prekey_public));
    append(master, ecdh(probe_eph.secret, bundle.one_time_prekey->second));

    // the debug dump must not contain the master bytes (nor any prefix term)
    std::string dump = init.session.to_json().dump();
    CHECK(dump.find(hex_encode(master)) == std::string::npos);
    CHECK(dump.find(hex_encode(Bytes(master.begin(), master.begin() + 32))) == std::string::npos);

    SessionState bob_session = accept_session(bob, init.header, alice.user_id());
    std::string bob_dump = bob_session.to_json().dump();
    CHECK(bob_dump.find(hex_encode(master)) == std::string::npos);

    // while the derived root key is of course present
    CHECK(dump.find(hex_encode(init.session.root_key)) != std::string::npos);
}

TEST_CASE("session state serialization round trip") {
    DeterministicRandom rng(26);
    KeyStore alice = KeyStore::generate("+15550000001", 1, rng);
    KeyStore bob = KeyStore::generate("+15550000002", 1, rng);

    InitiationResult init = initiate_session(alice, bob.public_bundle(true), rng);
    SessionState bob_session = accept_session(bob, init.header, alice.user_id());

    // make the state interesting: counters, skipped keys, pending handshake
    MessageEnvelope e0 = encrypt_message(init.session, to_bytes("zero"));
    MessageEnvelope e1 = encrypt_message(init.session, to_bytes("one"));
    MessageEnvelope e2 = encrypt_message(init.session, to_bytes("two"));
    (void)e0;
    CHECK(to_string(decrypt_message(bob_session, e2)) == "two");  // skips 0,1

    SessionState alice_restored = SessionState::from_json(init.session.to_json());
    SessionState bob_restored = SessionState::from_json(bob_session.to_json());
    CHECK(alice_restored.to_json() == init.session.to_json());
    CHECK(bob_restored.to_json() == bob_session.to_json());

    // restored states keep working
    CHECK(to_string(decrypt_message(bob_restored, e1)) == "one");
    MessageEnvelope e3 = encrypt_message(alice_restored, to_bytes("three"));
    CHECK(to_string(decrypt_message(bob_restored, e3)) == "three");
}

TEST_CASE("agreement property over many randomized handshakes") {
    DeterministicRandom rng(27);
    for (int i = 0; i < 50; ++i) {
        KeyStore a = KeyStore::generate("+15551000001", i % 3 == 0 ? 0 : 2, rng);
        KeyStore b = KeyStore::generate("+15551000002", i % 2 == 0 ? 0 : 2, rng);
        PreKeyBundle bundle = b.public_bundle(true);
        InitiationResult init = initiate_session(a, bundle, rng);
        SessionState accepted = accept_session(b, init.header, a.user_id());
        REQUIRE(accepted.root_key == init.session.root_key);
        REQUIRE(accepted.recv_chain.chain_key == init.session.send_chain.chain_key);
        REQUIRE(accepted.send_chain.chain_key == init.session.recv_chain.chain_key);
    }
}
