#pragma once

#include <stdexcept>
#include <string>

namespace ratchetlab {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed caller input: bad user id, wrong key length, bad flag value.
class ValidationError : public Error {
  public:
    using Error::Error;
};

// Protocol-level failure: refused handshakes, replays, bad registrations.
class ProtocolError : public Error {
  public:
    using Error::Error;
};

// MAC mismatch or tampered wire bytes. Receiver state is left unchanged.
class IntegrityError : public ProtocolError {
  public:
    using ProtocolError::ProtocolError;
};

// A message (or one-time prekey) was presented a second time.
class ReplayError : public ProtocolError {
  public:
    using ProtocolError::ProtocolError;
};

// File I/O and parse failures on persisted state.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace ratchetlab
