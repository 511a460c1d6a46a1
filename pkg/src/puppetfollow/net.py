"""Network transports for the session protocol.

Two front doors over the same Session state machine:
  - a newline-delimited JSON TCP server (asyncio, no extra dependencies)
  - a WebSocket bridge + static file host for the browser client
    (FastAPI/uvicorn, installed via the `serve` extra)
"""

from __future__ import annotations

import asyncio
import glob
import os

from .demo import demo_clips
from .io_formats import read_any
from .core import ActionTemplate, FollowerModel, MotionClip
from .service import AssetRegistry, Session


def load_assets(registry: AssetRegistry, asset_dir: str):
    """Load every *.seq / *.model file in a directory into the registry."""
    for path in sorted(glob.glob(os.path.join(asset_dir, "*"))):
        if not (path.endswith(".seq") or path.endswith(".model")):
            continue
        obj = read_any(path)
        if isinstance(obj, ActionTemplate):
            registry.put_template(obj)
        elif isinstance(obj, MotionClip):
            registry.put_clip(obj)
        elif isinstance(obj, FollowerModel):
            registry.put_model(obj)


def load_demo_assets(registry: AssetRegistry):
    for clip in demo_clips():
        registry.put_clip(clip)


async def _serve_connection(registry, reader, writer):
    session = Session(registry)
    try:
        while True:
            line = await reader.readline()
            if not line:
                break
            for event in session.handle_line(line.decode("utf-8")):
                writer.write(event.encode("utf-8") + b"\n")
            await writer.drain()  # backpressure instead of dropping frames
    except (ConnectionResetError, asyncio.IncompleteReadError):
        pass
    finally:
        writer.close()


async def run_tcp_server(registry: AssetRegistry, host: str, port: int,
                         ready_event: asyncio.Event | None = None):
    server = await asyncio.start_server(
        lambda r, w: _serve_connection(registry, r, w), host, port)
    if ready_event is not None:
        ready_event.set()
    async with server:
        await server.serve_forever()


def create_http_app(registry: AssetRegistry, frontend_dir: str | None = None):
    """FastAPI app: /ws speaks the protocol (one text message per line),
    / serves the browser client when a frontend build directory is given."""
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="puppetfollow")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(registry)
        try:
            while True:
                line = await ws.receive_text()
                for event in session.handle_line(line):
                    await ws.send_text(event)
        except WebSocketDisconnect:
            pass

    if frontend_dir and os.path.isdir(frontend_dir):
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")
    return app
