#!/usr/bin/env python3
"""Regenerates the sample meshes and textures under data/.

The meshes are coarse stand-ins for small industrial parts, assembled from
boxes, cylinders and spheres. Units are meters. Output is deterministic.
"""

import math
import random
import struct
import sys
import zlib
from pathlib import Path


class MeshBuilder:
    def __init__(self):
        self.v = []
        self.f = []

    def add(self, verts, faces):
        base = len(self.v)
        self.v.extend(verts)
        self.f.extend(tuple(base + i for i in face) for face in faces)

    def box(self, center, size, rot_z=0.0):
        cx, cy, cz = center
        hx, hy, hz = (s / 2 for s in size)
        c, s = math.cos(rot_z), math.sin(rot_z)
        verts = []
        for k in range(8):
            x = hx if k & 1 else -hx
            y = hy if k & 2 else -hy
            z = hz if k & 4 else -hz
            verts.append((cx + c * x - s * y, cy + s * x + c * y, cz + z))
        faces = [(0, 2, 3, 1), (4, 5, 7, 6), (0, 1, 5, 4), (2, 6, 7, 3), (0, 4, 6, 2), (1, 3, 7, 5)]
        self.add(verts, faces)

    def cylinder(self, center, radius, length, axis="z", segments=24, inner=0.0):
        """Solid or hollow (inner > 0) cylinder along an axis."""
        def place(r, a, t):
            u, w = r * math.cos(a), r * math.sin(a)
            if axis == "z":
                p = (u, w, t)
            elif axis == "x":
                p = (t, u, w)
            else:
                p = (w, t, u)
            return tuple(center[i] + p[i] for i in range(3))

        h = length / 2
        angles = [2 * math.pi * k / segments for k in range(segments)]
        verts = [place(radius, a, -h) for a in angles] + [place(radius, a, h) for a in angles]
        faces = []
        n = segments
        for k in range(n):
            k1 = (k + 1) % n
            faces.append((k, k1, n + k1, n + k))
        if inner > 0:
            verts += [place(inner, a, -h) for a in angles] + [place(inner, a, h) for a in angles]
            for k in range(n):
                k1 = (k + 1) % n
                faces.append((2 * n + k1, 2 * n + k, 3 * n + k, 3 * n + k1))
                faces.append((k1, k, 2 * n + k, 2 * n + k1))
                faces.append((n + k, n + k1, 3 * n + k1, 3 * n + k))
        else:
            verts += [place(0, 0, -h), place(0, 0, h)]
            for k in range(n):
                k1 = (k + 1) % n
                faces.append((2 * n, k1, k))
                faces.append((2 * n + 1, n + k, n + k1))
        self.add(verts, faces)

    def sphere(self, center, radius, rings=12, segments=24):
        verts = [(center[0], center[1], center[2] - radius)]
        for r in range(1, rings):
            phi = math.pi * r / rings - math.pi / 2
            for s in range(segments):
                th = 2 * math.pi * s / segments
                verts.append((center[0] + radius * math.cos(phi) * math.cos(th),
                              center[1] + radius * math.cos(phi) * math.sin(th),
                              center[2] + radius * math.sin(phi)))
        verts.append((center[0], center[1], center[2] + radius))
        top = len(verts) - 1
        faces = []
        for s in range(segments):
            faces.append((0, 1 + (s + 1) % segments, 1 + s))
        for r in range(rings - 2):
            a, b = 1 + r * segments, 1 + (r + 1) * segments
            for s in range(segments):
                s1 = (s + 1) % segments
                faces.append((a + s, a + s1, b + s1, b + s))
        last = 1 + (rings - 2) * segments
        for s in range(segments):
            faces.append((top, last + s, last + (s + 1) % segments))
        self.add(verts, faces)

    def write(self, path, name):
        with open(path, "w", newline="\n") as out:
            out.write(f"# {name}\n")
            for x, y, z in self.v:
                out.write(f"v {x:.6f} {y:.6f} {z:.6f}\n")
            for face in self.f:
                out.write("f " + " ".join(str(i + 1) for i in face) + "\n")


def l_bracket():
    m = MeshBuilder()
    m.box((0, 0, 0.002), (0.04, 0.02, 0.004))
    m.box((-0.018, 0, 0.02), (0.004, 0.02, 0.04))
    return m


def u_bracket():
    m = MeshBuilder()
    m.box((0, 0, 0.002), (0.04, 0.02, 0.004))
    m.box((-0.018, 0, 0.015), (0.004, 0.02, 0.03))
    m.box((0.018, 0, 0.015), (0.004, 0.02, 0.03))
    return m


def angle_bracket():
    m = MeshBuilder()
    m.box((0, 0, 0.002), (0.05, 0.025, 0.004))
    m.box((-0.023, 0, 0.02), (0.004, 0.025, 0.04))
    m.box((-0.01, 0, 0.012), (0.03, 0.004, 0.004), rot_z=0.0)
    return m


def seat():
    m = MeshBuilder()
    m.cylinder((0, 0, 0.006), 0.018, 0.012, inner=0.009)
    m.cylinder((0, 0, 0.016), 0.012, 0.008, inner=0.009)
    return m


def pipe_clamp():
    m = MeshBuilder()
    m.cylinder((0, 0, 0.016), 0.016, 0.012, axis="y", inner=0.012)
    m.box((-0.024, 0, 0.002), (0.012, 0.012, 0.004))
    m.box((0.024, 0, 0.002), (0.012, 0.012, 0.004))
    return m


def handle():
    m = MeshBuilder()
    m.cylinder((0, 0, 0.03), 0.005, 0.05, axis="x", segments=16)
    m.cylinder((-0.025, 0, 0.015), 0.005, 0.03, segments=16)
    m.cylinder((0.025, 0, 0.015), 0.005, 0.03, segments=16)
    return m


def bonnet():
    m = MeshBuilder()
    m.cylinder((0, 0, 0.004), 0.02, 0.008, segments=6)
    m.cylinder((0, 0, 0.018), 0.011, 0.02)
    m.cylinder((0, 0, 0.032), 0.005, 0.008, segments=6)
    return m


def body():
    m = MeshBuilder()
    m.sphere((0, 0, 0.02), 0.018)
    m.cylinder((0, 0, 0.02), 0.01, 0.07, axis="x")
    m.cylinder((0, 0, 0.04), 0.009, 0.012)
    return m


def ball():
    m = MeshBuilder()
    m.sphere((0, 0, 0.02), 0.02, rings=16, segments=32)
    m.cylinder((0, 0, 0.02), 0.008, 0.042, axis="x", segments=16)
    return m


def cable_shoe():
    m = MeshBuilder()
    m.cylinder((0, 0, 0.006), 0.006, 0.03, axis="x", segments=16, inner=0.004)
    m.box((0.028, 0, 0.003), (0.026, 0.014, 0.003))
    return m


MESHES = {
    "l_bracket": l_bracket,
    "u_bracket": u_bracket,
    "angle_bracket": angle_bracket,
    "seat": seat,
    "pipe_clamp": pipe_clamp,
    "handle": handle,
    "bonnet": bonnet,
    "body": body,
    "ball": ball,
    "cable_shoe": cable_shoe,
}


def write_png(path, width, height, pixels):
    raw = b"".join(b"\x00" + bytes(pixels[y * width * 3:(y + 1) * width * 3]) for y in range(height))

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    png = b"\x89PNG\r\n\x1a\n"
    png += chunk(b"IHDR", struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0))
    png += chunk(b"IDAT", zlib.compress(raw, 9))
    png += chunk(b"IEND", b"")
    Path(path).write_bytes(png)


def texture(kind, size, rng):
    a = [rng.randrange(256) for _ in range(3)]
    b = [rng.randrange(256) for _ in range(3)]
    freq = rng.choice([4, 6, 8, 12])
    px = []
    for y in range(size):
        for x in range(size):
            u, v = x / size, y / size
            if kind == "checker":
                t = ((int(u * freq) + int(v * freq)) & 1)
            elif kind == "stripes":
                t = 0.5 + 0.5 * math.sin(2 * math.pi * freq * (u + 0.3 * v))
            elif kind == "rings":
                t = 0.5 + 0.5 * math.sin(2 * math.pi * freq * math.hypot(u - 0.5, v - 0.5))
            else:
                t = 0.5 + 0.25 * (math.sin(2 * math.pi * freq * u) * math.cos(2 * math.pi * freq * v)
                                  + math.sin(2 * math.pi * (freq + 3) * (u * v)))
            t += rng.uniform(-0.08, 0.08)
            t = min(1.0, max(0.0, t))
            px.extend(round(a[i] * (1 - t) + b[i] * t) for i in range(3))
    return px


def main(root):
    root = Path(root)
    (root / "meshes").mkdir(parents=True, exist_ok=True)
    (root / "textures").mkdir(parents=True, exist_ok=True)
    for name, make in MESHES.items():
        make().write(root / "meshes" / f"{name}.obj", name)
    rng = random.Random(7)
    kinds = ["checker", "stripes", "rings", "blend"]
    for i in range(12):
        kind = kinds[i % len(kinds)]
        write_png(root / "textures" / f"{kind}_{i:02d}.png", 64, 64, texture(kind, 64, rng))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
