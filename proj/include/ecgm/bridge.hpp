#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include "ecgm/codec.hpp"

namespace ecgm::ble {

inline constexpr std::size_t kAttOverhead = 3;
inline constexpr std::size_t kDefaultMtu = 23;
inline constexpr std::size_t kMinMtu = 23;
inline constexpr std::size_t kMaxMtu = 251;
inline constexpr std::size_t kTxBufferCap = 8192;

enum class Phase : std::uint8_t { PoweredOff, Initialized, Advertising, Connected };

const char* to_string(Phase phase) noexcept;

struct Notification {
  std::uint32_t seq = 0;
  codec::Bytes payload;

  bool operator==(const Notification&) const = default;
};

enum class BridgeEventKind : std::uint8_t { PowerOn, Connect, Disconnect, MtuUpdate };

struct BridgeEvent {
  BridgeEventKind kind;
  std::size_t mtu = 0;  // MtuUpdate only

  static BridgeEvent power_on() { return {BridgeEventKind::PowerOn}; }
  static BridgeEvent connect() { return {BridgeEventKind::Connect}; }
  static BridgeEvent disconnect() { return {BridgeEventKind::Disconnect}; }
  static BridgeEvent mtu_update(std::size_t n) { return {BridgeEventKind::MtuUpdate, n}; }
};

struct Transition {
  Phase from;
  Phase to;
  std::vector<Phase> path;  // every phase entered, in order
  std::size_t mtu;
  std::uint32_t next_seq;
};

struct UartResult {
  std::vector<Notification> notifications;
  bool overflow = false;
};

struct BridgeStats {
  std::uint64_t notifications = 0;
  std::uint64_t brts_pulses = 0;
  std::uint64_t overflows = 0;
  std::uint64_t dropped = 0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
};

/// Serial-to-BLE bridge: buffers UART bytes and, once connected, drains them
/// as notifications of at most mtu - 3 bytes. Every public call is
/// serialized on an internal mutex, so a device thread and a host thread
/// may share one bridge.
class Bridge {
 public:
  /// Returns true for a sequence number that should be lost on the air.
  using DropHook = std::function<bool(std::uint32_t seq)>;

  Bridge() = default;

  Transition handle_event(const BridgeEvent& event);
  UartResult uart_in(std::span<const std::uint8_t> bytes);

  void set_drop_hook(DropHook hook);

  Phase phase() const;
  std::size_t mtu() const;
  std::size_t payload_limit() const;
  std::size_t buffered() const;
  bool en() const;
  bool brts() const;
  BridgeStats stats() const;

 private:
  std::vector<Notification> drain_locked();

  mutable std::mutex mu_;
  Phase phase_ = Phase::PoweredOff;
  std::size_t mtu_ = kDefaultMtu;
  std::deque<std::uint8_t> tx_;
  std::uint32_t next_seq_ = 0;
  bool en_ = false;
  bool brts_ = false;
  DropHook drop_;
  BridgeStats stats_;
};

/// Concatenate payloads of a contiguous ascending run starting at first_seq.
codec::Bytes reassemble(std::span<const Notification> notifications, std::uint32_t first_seq = 0);

/// Split a byte stream into notifications the way a connected bridge would.
std::vector<Notification> segment(std::span<const std::uint8_t> bytes, std::size_t mtu,
                                  std::uint32_t first_seq = 0);

}  // namespace ecgm::ble
