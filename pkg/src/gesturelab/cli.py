"""Command line front end.

Subcommands mirror the stages of the rig: synth a dataset, train weights,
classify or track a recorded frame directory, watch for motion, and serve
the control plane. Report-producing commands render PNG figures next to
their delimited outputs unless --no-plot is given.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import json
import os
import socket
import sys

import numpy as np

from . import __version__
from .classifier import (
    COMPACT_ARCH,
    FULL_ARCH,
    TrainingConfig,
    accuracy,
    init_network,
    load_weights,
    one_hot,
    save_weights,
    train,
)
from .controlplane.bridge import DashboardBridge
from .controlplane.devices import DeviceError
from .controlplane.grammar import CommandGrammar, GrammarError
from .controlplane.motion import BackgroundModel
from .controlplane.server import LabServer
from .imaging import NetpbmError
from .markers import ActionConfig, CursorMap
from .pipeline import (
    GesturePipeline,
    PipelineConfig,
    StreamError,
    load_frames,
    write_jsonl,
)
from .synthetic import generate_dataset, load_dataset, save_dataset
from . import reports


def _parse_arch(text: str):
    if text == "full":
        return FULL_ARCH
    if text == "compact":
        return COMPACT_ARCH
    try:
        arch = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"arch must be 'full', 'compact', or comma-separated sizes, got {text!r}")
    if len(arch) < 2:
        raise argparse.ArgumentTypeError("arch needs at least two layers")
    return arch


def _parse_size(text: str):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")


def _parse_endpoint(text: str):
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host, int(port)


def _post_messages(endpoint, role: str, messages) -> int:
    """Send messages over the wire protocol; returns the number of acks."""
    host, port = endpoint
    acked = 0
    with socket.create_connection((host, port), timeout=5.0) as sock:
        stream = sock.makefile("rwb")
        def send(obj):
            stream.write(json.dumps(obj, separators=(",", ":")).encode() + b"\n")
            stream.flush()
        send({"type": "hello", "role": role})
        while True:
            line = stream.readline()
            if not line:
                raise ConnectionError("server closed during handshake")
            if json.loads(line).get("type") == "hello":
                break
        for message in messages:
            send(message)
        expected = len(messages)
        while acked < expected:
            line = stream.readline()
            if not line:
                break
            reply = json.loads(line)
            if reply.get("type") == "ack":
                acked += 1
            elif reply.get("type") == "error":
                raise ValueError(f"server rejected a message: {reply.get('detail')}")
    return acked


def _atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


# --- subcommands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    written = save_dataset(args.out, per_class=args.per_class, seed=args.seed)
    print(f"wrote {written} samples under {args.out}")
    return 0


def cmd_train(args) -> int:
    samples, labels = load_dataset(args.data)
    arch = args.arch
    if arch[0] != samples.shape[1]:
        raise ValueError(f"arch input {arch[0]} does not match sample size {samples.shape[1]}")
    classes = arch[-1]
    targets = np.stack([one_hot(int(label), classes=classes) for label in labels])

    net = init_network(arch, seed=args.seed)
    config = TrainingConfig(learning_rate=args.lr, epochs=args.epochs,
                            batch_size=args.batch_size, seed=args.seed)
    result = train(net, samples, targets, config)
    save_weights(net, args.weights_out)

    rows = ["epoch,loss"] + [f"{i + 1},{value!r}" for i, value in enumerate(result.losses)]
    _atomic_write_text(args.loss_csv, "\n".join(rows) + "\n")
    if not args.no_plot:
        reports.loss_curve(result.losses, args.loss_plot)

    train_accuracy = accuracy(net, samples, labels)
    print(f"trained {'-'.join(str(n) for n in arch)} for {result.epochs_run} epochs: "
          f"final loss {result.losses[-1]:.6f}, training accuracy {train_accuracy:.3f}")
    print(f"weights -> {args.weights_out}")
    return 0


def _pipeline_config(args, with_cursor: bool) -> PipelineConfig:
    config = PipelineConfig()
    config.ycbcr_mode = args.ycbcr_mode
    config.debounce_depth = args.depth
    config.debounce_threshold = args.threshold
    config.gesture_min_area = args.min_area
    config.action = ActionConfig(min_area=args.marker_min_area,
                                 hold_frames=args.hold_frames,
                                 scroll_scale=args.scroll_scale)
    config.marker_min_area = args.marker_min_area
    if with_cursor and args.screen is not None and args.video is not None:
        config.cursor = CursorMap(
            video_w=args.video[0], video_h=args.video[1],
            screen_w=args.screen[0], screen_h=args.screen[1],
            alpha=args.alpha, beta=args.beta, delta=args.delta, gamma=args.gamma)
    return config


def _add_pipeline_options(sub, gesture: bool) -> None:
    sub.add_argument("--frames", required=True, help="directory of frame_<n>.ppm files")
    sub.add_argument("--events", default="events.jsonl")
    sub.add_argument("--no-plot", action="store_true",
                     help="skip rendering PNG figures next to the logs")
    sub.add_argument("--screen", type=_parse_size, default=None, metavar="WxH")
    sub.add_argument("--video", type=_parse_size, default=None, metavar="WxH",
                     help="video dimensions for the cursor map (with --screen)")
    sub.add_argument("--alpha", type=float, default=1.0)
    sub.add_argument("--beta", type=float, default=1.0)
    sub.add_argument("--delta", type=float, default=0.0)
    sub.add_argument("--gamma", type=float, default=0.0)
    sub.add_argument("--marker-min-area", type=int, default=25)
    sub.add_argument("--hold-frames", type=int, default=3)
    sub.add_argument("--scroll-scale", type=float, default=1.0)
    if gesture:
        sub.add_argument("--weights", required=True)
        sub.add_argument("--trace", default="trace.jsonl")
        sub.add_argument("--ycbcr-mode", choices=["verbatim", "standard"],
                         default="verbatim")
        sub.add_argument("--depth", type=int, default=5,
                         help="frames of agreement required to confirm a gesture")
        sub.add_argument("--threshold", type=float, default=0.95)
        sub.add_argument("--min-area", type=int, default=100,
                         help="smallest skin blob considered a hand")
        sub.add_argument("--post", type=_parse_endpoint, default=None, metavar="HOST:PORT",
                         help="send confirmed gestures to a control server")


def cmd_classify(args) -> int:
    net = load_weights(args.weights)
    config = _pipeline_config(args, with_cursor=True)
    result = GesturePipeline(net, config).run(load_frames(args.frames))

    write_jsonl(args.events, result.events)
    write_jsonl(args.trace, result.trace)
    if not args.no_plot:
        base = os.path.dirname(os.path.abspath(args.events))
        reports.confidence_trace(result.trace, os.path.join(base, "confidence.png"))
        reports.pointer_trajectory(result.events, os.path.join(base, "trajectory.png"),
                                   screen=args.screen)

    gestures = [e for e in result.events if e["kind"] == "gesture"]
    print(f"{len(result.trace)} frames -> {len(result.events)} events "
          f"({len(gestures)} gestures)")
    if args.post is not None:
        acked = _post_messages(args.post, "sensor", [
            {"type": "gesture_event", "g": e["g"], "frame": e["frame"]} for e in gestures])
        print(f"posted {acked} gesture events to {args.post[0]}:{args.post[1]}")
    return 0


def cmd_markers(args) -> int:
    args.ycbcr_mode = "verbatim"
    args.depth = 5
    args.threshold = 0.95
    args.min_area = 100
    config = _pipeline_config(args, with_cursor=True)
    result = GesturePipeline(None, config).run(load_frames(args.frames))

    write_jsonl(args.events, result.events)
    if not args.no_plot:
        base = os.path.dirname(os.path.abspath(args.events))
        reports.pointer_trajectory(result.events, os.path.join(base, "trajectory.png"),
                                   screen=args.screen)
    print(f"{len(result.trace)} frames -> {len(result.events)} pointer events")
    return 0


def cmd_motion(args) -> int:
    model = BackgroundModel(warmup=args.warmup, tau=args.tau, rho=args.rho)
    rows = []
    for number, frame in load_frames(args.frames):
        report = model.feed(frame)
        if report is not None:
            rows.append({"frame": number, "changed": report.changed,
                         "limit": report.limit, "alert": report.alert})
    write_jsonl(args.out, rows)
    if not args.no_plot:
        base = os.path.dirname(os.path.abspath(args.out))
        reports.motion_profile(rows, os.path.join(base, "motion.png"))

    alerts = [r for r in rows if r["alert"]]
    print(f"{len(rows)} watched frames, {len(alerts)} alerts")
    if args.post is not None and alerts:
        acked = _post_messages(args.post, "sensor", [
            {"type": "motion_alert", "changed": r["changed"], "frame": r["frame"]}
            for r in alerts])
        print(f"posted {acked} alerts to {args.post[0]}:{args.post[1]}")
    return 0


def cmd_serve(args) -> int:
    grammar = CommandGrammar.from_json(args.grammar) if args.grammar else None
    server = LabServer(grammar=grammar, unlock_ttl=args.unlock_ttl,
                       expiry=args.expiry, tick_interval=args.tick_interval)
    ws_port = args.ws_port
    if args.with_dashboard and ws_port is None:
        ws_port = args.port + 1
    static_root = args.dashboard_root if args.with_dashboard else None
    if static_root is not None and not os.path.isdir(static_root):
        raise FileNotFoundError(
            f"dashboard root {static_root!r} does not exist (build the frontend first)")

    async def run():
        await server.start(args.host, args.port)
        print(f"control plane on tcp://{args.host}:{server.port}", flush=True)
        bridge = None
        if ws_port is not None:
            bridge = DashboardBridge("127.0.0.1", server.port, static_root=static_root)
            await bridge.start(args.host, ws_port)
            print(f"websocket bridge on ws://{args.host}:{bridge.port}/ws", flush=True)
            if static_root is not None:
                print(f"dashboard at http://{args.host}:{bridge.port}/", flush=True)
        try:
            await server.serve_forever()
        finally:
            if bridge is not None:
                await bridge.close()
            await server.close()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesturelab",
        description="Gesture and color-marker perception with an IoT lab control plane.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="generate a synthetic gesture dataset")
    synth.add_argument("--out", required=True)
    synth.add_argument("--per-class", type=int, default=200)
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(func=cmd_synth)

    train_cmd = commands.add_parser("train", help="train classifier weights on a dataset")
    train_cmd.add_argument("--data", required=True)
    train_cmd.add_argument("--weights-out", default="weights.json")
    train_cmd.add_argument("--arch", type=_parse_arch, default=COMPACT_ARCH)
    train_cmd.add_argument("--lr", type=float, default=TrainingConfig.learning_rate)
    train_cmd.add_argument("--epochs", type=int, default=TrainingConfig.epochs)
    train_cmd.add_argument("--batch-size", type=int, default=TrainingConfig.batch_size)
    train_cmd.add_argument("--seed", type=int, default=0)
    train_cmd.add_argument("--loss-csv", default="loss.csv")
    train_cmd.add_argument("--loss-plot", default="loss.png")
    train_cmd.add_argument("--no-plot", action="store_true")
    train_cmd.set_defaults(func=cmd_train)

    classify = commands.add_parser(
        "classify", help="run the full pipeline over a recorded frame directory")
    _add_pipeline_options(classify, gesture=True)
    classify.set_defaults(func=cmd_classify)

    markers = commands.add_parser(
        "markers", help="run only the pointer route (no classifier needed)")
    _add_pipeline_options(markers, gesture=False)
    markers.set_defaults(func=cmd_markers)

    motion = commands.add_parser("motion", help="background-difference motion watch")
    motion.add_argument("--frames", required=True)
    motion.add_argument("--warmup", type=int, default=30)
    motion.add_argument("--tau", type=float, default=25.0)
    motion.add_argument("--rho", type=float, default=0.005)
    motion.add_argument("--out", default="motion.jsonl")
    motion.add_argument("--no-plot", action="store_true")
    motion.add_argument("--post", type=_parse_endpoint, default=None, metavar="HOST:PORT")
    motion.set_defaults(func=cmd_motion)

    serve = commands.add_parser("serve", help="run the lab control server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=7171)
    serve.add_argument("--ws-port", type=int, default=None,
                       help="also open a websocket bridge on this port")
    serve.add_argument("--with-dashboard", action="store_true",
                       help="serve the built dashboard over the bridge port")
    serve.add_argument("--dashboard-root", default="frontend/dist")
    serve.add_argument("--grammar", default=None, help="JSON file of phrase mappings")
    serve.add_argument("--unlock-ttl", type=float, default=10.0)
    serve.add_argument("--expiry", type=float, default=60.0)
    serve.add_argument("--tick-interval", type=float, default=0.25)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StreamError, NetpbmError, GrammarError, DeviceError,
            ValueError, OSError, ConnectionError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
