#include "ecgm/bridge.hpp"

#include <algorithm>
#include <string>

#include "ecgm/error.hpp"

namespace ecgm::ble {

namespace {

[[noreturn]] void illegal(Phase phase, const char* event) {
  throw Error(ErrorKind::ProtocolState,
              std::string(event) + " is not legal while " + to_string(phase));
}

void check_mtu(std::size_t mtu) {
  if (mtu < kMinMtu || mtu > kMaxMtu) {
    throw Error(ErrorKind::Parameter,
                "MTU " + std::to_string(mtu) + " outside [23, 251]");
  }
}

}  // namespace

const char* to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::PoweredOff: return "PoweredOff";
    case Phase::Initialized: return "Initialized";
    case Phase::Advertising: return "Advertising";
    case Phase::Connected: return "Connected";
  }
  return "?";
}

Transition Bridge::handle_event(const BridgeEvent& event) {
  std::lock_guard lock(mu_);
  brts_ = false;
  Transition tr{phase_, phase_, {}, mtu_, next_seq_};
  switch (event.kind) {
    case BridgeEventKind::PowerOn:
      if (phase_ != Phase::PoweredOff) illegal(phase_, "PowerOn");
      en_ = true;
      // Service setup happens in Initialized; advertising starts right after.
      tr.path = {Phase::Initialized, Phase::Advertising};
      phase_ = Phase::Advertising;
      break;
    case BridgeEventKind::Connect:
      if (phase_ != Phase::Advertising) illegal(phase_, "Connect");
      tr.path = {Phase::Connected};
      phase_ = Phase::Connected;
      next_seq_ = 0;
      break;
    case BridgeEventKind::Disconnect:
      if (phase_ != Phase::Connected) illegal(phase_, "Disconnect");
      tr.path = {Phase::Advertising};
      phase_ = Phase::Advertising;
      mtu_ = kDefaultMtu;
      break;
    case BridgeEventKind::MtuUpdate:
      if (phase_ != Phase::Connected) illegal(phase_, "MtuUpdate");
      check_mtu(event.mtu);
      mtu_ = event.mtu;
      break;
  }
  tr.to = phase_;
  tr.mtu = mtu_;
  tr.next_seq = next_seq_;
  return tr;
}

UartResult Bridge::uart_in(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(mu_);
  // BRTS only stays high until the next call on the bridge.
  brts_ = false;
  UartResult out;
  if (phase_ != Phase::Connected && tx_.size() + bytes.size() > kTxBufferCap) {
    ++stats_.overflows;
    out.overflow = true;
    return out;
  }
  stats_.bytes_in += bytes.size();
  tx_.insert(tx_.end(), bytes.begin(), bytes.end());
  if (phase_ == Phase::Connected) out.notifications = drain_locked();
  return out;
}

std::vector<Notification> Bridge::drain_locked() {
  std::vector<Notification> out;
  const std::size_t limit = mtu_ - kAttOverhead;
  brts_ = !tx_.empty();
  while (!tx_.empty()) {
    const std::size_t n = std::min(limit, tx_.size());
    Notification note{next_seq_++, codec::Bytes(tx_.begin(), tx_.begin() + static_cast<std::ptrdiff_t>(n))};
    tx_.erase(tx_.begin(), tx_.begin() + static_cast<std::ptrdiff_t>(n));
    ++stats_.notifications;
    ++stats_.brts_pulses;
    stats_.bytes_out += n;
    if (drop_ && drop_(note.seq)) {
      ++stats_.dropped;
      continue;
    }
    out.push_back(std::move(note));
  }
  return out;
}

void Bridge::set_drop_hook(DropHook hook) {
  std::lock_guard lock(mu_);
  drop_ = std::move(hook);
}

Phase Bridge::phase() const {
  std::lock_guard lock(mu_);
  return phase_;
}

std::size_t Bridge::mtu() const {
  std::lock_guard lock(mu_);
  return mtu_;
}

std::size_t Bridge::payload_limit() const {
  std::lock_guard lock(mu_);
  return mtu_ - kAttOverhead;
}

std::size_t Bridge::buffered() const {
  std::lock_guard lock(mu_);
  return tx_.size();
}

bool Bridge::en() const {
  std::lock_guard lock(mu_);
  return en_;
}

bool Bridge::brts() const {
  std::lock_guard lock(mu_);
  return brts_;
}

BridgeStats Bridge::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

codec::Bytes reassemble(std::span<const Notification> notifications, std::uint32_t first_seq) {
  codec::Bytes out;
  std::uint32_t expected = first_seq;
  for (const auto& note : notifications) {
    if (note.seq != expected) {
      throw TransportGapError(expected, "transport gap: expected notification " +
                                            std::to_string(expected) + ", got " +
                                            std::to_string(note.seq));
    }
    out.insert(out.end(), note.payload.begin(), note.payload.end());
    ++expected;
  }
  return out;
}

std::vector<Notification> segment(std::span<const std::uint8_t> bytes, std::size_t mtu,
                                  std::uint32_t first_seq) {
  check_mtu(mtu);
  const std::size_t limit = mtu - kAttOverhead;
  std::vector<Notification> out;
  for (std::size_t i = 0; i < bytes.size(); i += limit) {
    const std::size_t n = std::min(limit, bytes.size() - i);
    out.push_back({first_seq++, codec::Bytes(bytes.begin() + static_cast<std::ptrdiff_t>(i),
                                             bytes.begin() + static_cast<std::ptrdiff_t>(i + n))});
  }
  return out;
}

}  // namespace ecgm::ble
