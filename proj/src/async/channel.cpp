#include "metasim/async/channel.hpp"

#include <stdexcept>

#include "metasim/error.hpp"
#include "metasim/hash.hpp"

namespace metasim::async {

using metrics::WireClass;
using sim::Action;
using sim::ActionKind;

ChannelId ChannelNetwork::add_channel(ChannelConfig cfg) {
  if (cfg.width == 0 || cfg.width > 64) {
    throw std::invalid_argument("channel width must be in [1, 64]");
  }
  const Duration worst = cfg.data_delay.worst_case();
  if (cfg.matched_delay == 0) cfg.matched_delay = worst + cfg.setup_margin;
  if (!cfg.allow_under_match) MatchedDelay(cfg.matched_delay, worst);

  const auto id = static_cast<ChannelId>(channels_.size());
  Channel c;
  c.cfg = std::move(cfg);
  c.req = add_wire(id, Role::Req, 0);
  c.ack = add_wire(id, Role::Ack, 0);
  c.data0 = static_cast<sim::ElementId>(levels_.size());
  for (unsigned b = 0; b < c.cfg.width; ++b) add_wire(id, Role::Data, static_cast<std::uint16_t>(b));
  channels_.push_back(std::move(c));
  return id;
}

sim::ElementId ChannelNetwork::add_wire(ChannelId ch, Role role, std::uint16_t bit) {
  levels_.push_back(0);
  wires_.push_back({ch, role, bit});
  return static_cast<sim::ElementId>(levels_.size() - 1);
}

void ChannelNetwork::emit(StepContext& ctx, sim::ElementId target, Action action, DelayKind kind,
                          ChannelId ch, bool after_bus) {
  ctx.emissions->push_back(Emission{target, action, kind, ch, after_bus});
}

void ChannelNetwork::send(ChannelId ch, Word word, StepContext& ctx) {
  Channel& c = channels_[ch];
  if (c.tx_busy) throw std::logic_error("send on busy channel");
  c.tx_busy = true;
  ++c.items_sent;

  WireOps ops;
  if (c.cfg.protocol == Protocol::FourPhase) {
    auto step = four_phase_sender_step(c.tx4, level(c.ack), true);
    c.tx4 = step.next;
    ops = step.ops;
  } else {
    auto step = two_phase_send(c.tx2);
    c.tx2 = step.next;
    ops = step.ops;
  }
  for (WireOp op : ops) {
    switch (op) {
      case WireOp::DriveData:
        drive_data(ch, word, ctx);
        break;
      case WireOp::RaiseReq:
      case WireOp::ToggleReq: {
        const bool value = op == WireOp::RaiseReq ? true : c.tx2.req_parity;
        const bool after_bus = bus_mode_ && c.bus_pending && c.matched_covers_data();
        emit(ctx, c.req, {ActionKind::SetLevel, value}, DelayKind::Matched, ch, after_bus);
        break;
      }
      default:
        break;
    }
  }
}

void ChannelNetwork::drive_data(ChannelId ch, Word word, StepContext& ctx) {
  Channel& c = channels_[ch];
  const Word mask = c.cfg.width == 64 ? ~Word{0} : ((Word{1} << c.cfg.width) - 1);
  word &= mask;
  const Word diff = (c.driven ^ word) & mask;
  c.driven = word;
  if (diff == 0) return;
  if (bus_mode_) {
    c.bus_pending = true;
    emit(ctx, ch, {ActionKind::SetBus, word}, DelayKind::Data, ch);
    return;
  }
  for (unsigned b = 0; b < c.cfg.width; ++b) {
    if ((diff >> b) & 1) {
      emit(ctx, c.data0 + b, {ActionKind::SetLevel, (word >> b) & 1}, DelayKind::Data, ch);
    }
  }
}

void ChannelNetwork::set_rx_ready(ChannelId ch, bool ready, StepContext& ctx) {
  Channel& c = channels_[ch];
  c.rx_ready = ready;
  if (!ready) return;
  if (c.cfg.protocol == Protocol::FourPhase) {
    if (c.rx4.phase == FourPhaseReceiverState::Phase::Idle && level(c.req)) {
      auto step = four_phase_receiver_step(c.rx4, true, true);
      c.rx4 = step.next;
      receiver_ops(ch, step.ops, ctx);
    }
  } else if (c.rx2.pending) {
    auto step = two_phase_receiver_step(c.rx2, false, true);
    c.rx2 = step.next;
    receiver_ops(ch, step.ops, ctx);
  }
}

Word ChannelNetwork::read_data(const Channel& c) const {
  Word w = 0;
  for (unsigned b = 0; b < c.cfg.width; ++b) {
    if (levels_[c.data0 + b]) w |= Word{1} << b;
  }
  return w;
}

void ChannelNetwork::receiver_ops(ChannelId ch, const WireOps& ops, StepContext& ctx) {
  Channel& c = channels_[ch];
  for (WireOp op : ops) {
    switch (op) {
      case WireOp::Latch: {
        ++c.items_latched;
        if (record_traces_) c.trace.push_back({TraceEntry::Kind::Latch, 0, ctx.now});
        ctx.notes->push_back({Notification::Kind::Latched, ch, read_data(c)});
        break;
      }
      case WireOp::RaiseAck:
        emit(ctx, c.ack, {ActionKind::SetLevel, 1}, DelayKind::Wire, ch);
        break;
      case WireOp::LowerAck:
        emit(ctx, c.ack, {ActionKind::SetLevel, 0}, DelayKind::Wire, ch);
        break;
      case WireOp::ToggleAck:
        emit(ctx, c.ack, {ActionKind::SetLevel, c.rx2.ack_parity}, DelayKind::Wire, ch);
        break;
      default:
        break;
    }
  }
}

bool ChannelNetwork::apply_level(sim::ElementId wire, bool value, StepContext& ctx) {
  if (static_cast<bool>(levels_[wire]) == value) {
    if (ctx.ledger) ctx.ledger->note_suppressed();
    return false;
  }
  levels_[wire] = value;
  const WireInfo& info = wires_[wire];
  if (ctx.ledger) {
    ctx.ledger->append(wire, info.role == Role::Data ? WireClass::Data : WireClass::Handshake, ctx.now);
  }
  if (info.role == Role::Data && record_traces_) {
    channels_[info.channel].trace.push_back({TraceEntry::Kind::Data, info.bit, ctx.now});
  }
  return true;
}

bool ChannelNetwork::on_event(const sim::Event& ev, StepContext& ctx) {
  if (ev.action.kind == ActionKind::SetBus) {
    if (ev.target >= channels_.size()) return false;
    Channel& c = channels_[ev.target];
    c.bus_pending = false;
    for (unsigned b = 0; b < c.cfg.width; ++b) {
      apply_level(c.data0 + b, (ev.action.value >> b) & 1, ctx);
    }
    return true;
  }
  if (ev.action.kind != ActionKind::SetLevel || ev.target >= levels_.size()) return false;

  const bool value = ev.action.value != 0;
  if (!apply_level(ev.target, value, ctx)) return true;

  const WireInfo info = wires_[ev.target];
  Channel& c = channels_[info.channel];
  const ChannelId ch = info.channel;

  if (info.role == Role::Req) {
    const bool carries_data = c.cfg.protocol == Protocol::TwoPhase || value;
    if (carries_data) {
      if (record_traces_) c.trace.push_back({TraceEntry::Kind::Req, 0, ctx.now});
      if (c.bus_pending) c.bundling_fault = true;
    }
    if (c.cfg.protocol == Protocol::FourPhase) {
      auto step = four_phase_receiver_step(c.rx4, value, c.rx_ready);
      c.rx4 = step.next;
      receiver_ops(ch, step.ops, ctx);
    } else {
      auto step = two_phase_receiver_step(c.rx2, true, c.rx_ready);
      c.rx2 = step.next;
      receiver_ops(ch, step.ops, ctx);
    }
  } else if (info.role == Role::Ack) {
    WireOps ops;
    if (c.cfg.protocol == Protocol::FourPhase) {
      auto step = four_phase_sender_step(c.tx4, value, false);
      c.tx4 = step.next;
      ops = step.ops;
    } else {
      auto step = two_phase_sender_step(c.tx2, true);
      c.tx2 = step.next;
      ops = step.ops;
    }
    for (WireOp op : ops) {
      if (op == WireOp::LowerReq) {
        emit(ctx, c.req, {ActionKind::SetLevel, 0}, DelayKind::Wire, ch);
      } else if (op == WireOp::CycleDone) {
        c.tx_busy = false;
        ctx.notes->push_back({Notification::Kind::SendDone, ch, 0});
      }
    }
  }
  return true;
}

std::vector<BundlingViolation> ChannelNetwork::bundling_violations() const {
  std::vector<BundlingViolation> out;
  for (const auto& c : channels_) {
    auto v = bundling_check(c.trace, c.cfg.setup_margin);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

bool ChannelNetwork::any_bundling_fault() const {
  for (const auto& c : channels_) {
    if (c.bundling_fault) return true;
  }
  return false;
}

bool ChannelNetwork::idle() const {
  for (const auto& c : channels_) {
    if (c.tx_busy || c.rx2.pending || c.bus_pending) return false;
    if (c.rx4.phase != FourPhaseReceiverState::Phase::Idle) return false;
    if (c.cfg.protocol == Protocol::FourPhase && (levels_[c.req] || levels_[c.ack])) return false;
  }
  return true;
}

std::uint64_t ChannelNetwork::fingerprint() const {
  Hasher h;
  std::uint64_t acc = 0;
  unsigned n = 0;
  for (auto l : levels_) {
    acc = (acc << 1) | l;
    if (++n == 64) {
      h.add(acc);
      acc = 0;
      n = 0;
    }
  }
  h.add(acc);
  for (const auto& c : channels_) {
    h.add(static_cast<std::uint64_t>(c.tx4.phase) | static_cast<std::uint64_t>(c.rx4.phase) << 4 |
          std::uint64_t{c.tx2.req_parity} << 8 | std::uint64_t{c.tx2.ack_parity} << 9 |
          std::uint64_t{c.tx2.pending} << 10 | std::uint64_t{c.rx2.req_parity} << 11 |
          std::uint64_t{c.rx2.ack_parity} << 12 | std::uint64_t{c.rx2.pending} << 13 |
          std::uint64_t{c.tx_busy} << 14 | std::uint64_t{c.rx_ready} << 15 |
          std::uint64_t{c.bus_pending} << 16 | std::uint64_t{c.bundling_fault} << 17);
    h.add(c.driven);
  }
  return h.value();
}

}  // namespace metasim::async
