"""On-disk cache of normalized point clouds.

File layout (all integers little-endian)::

    magic        8 bytes   b"JSPCLD01"
    content hash 32 bytes  sha256 of the canonical input document
    level        u32
    kind         8 bytes   ASCII, NUL padded (CARTAN / JORDAN)
    mode         8 bytes   ASCII, NUL padded (FULL / NECKLACE)
    frame kind   8 bytes   ASCII, NUL padded
    dim, nblocks u32, u32
    n_points     u64
    n_coords     u32
    word_len     u32       0 when provenance is not stored
    records      n_points * n_coords float64 (little-endian), row-major
    words        n_points * word_len uint8
    checksum     32 bytes  sha256 of everything above
"""
import hashlib
import os
import struct

import numpy as np

from .errors import CorruptCache
from .matgroup import GroupFrame
from .spectrum import SpectrumCloud

MAGIC = b"JSPCLD01"
_HEAD = struct.Struct("<8s32sI8s8s8sIIQII")


def cache_key(content_hash, level, kind, mode):
    return f"{content_hash[:24]}_{level}_{kind}_{mode}"


def cache_path(cache_dir, content_hash, level, kind, mode):
    return os.path.join(cache_dir, cache_key(content_hash, level, kind, mode) + ".jsc")


def encode(cloud, content_hash):
    pts = np.ascontiguousarray(cloud.points, dtype="<f8")
    words = cloud.words
    wl = 0 if words is None else words.shape[1]
    f = cloud.frame
    head = _HEAD.pack(MAGIC, bytes.fromhex(content_hash), cloud.level, cloud.kind.encode(),
                      cloud.mode.encode(), f.kind.encode(), f.dim, f.nblocks,
                      pts.shape[0], pts.shape[1], wl)
    body = head + pts.tobytes()
    if wl:
        body += np.ascontiguousarray(words, np.uint8).tobytes()
    return body + hashlib.sha256(body).digest()


def decode(blob, projection="native"):
    if len(blob) < _HEAD.size + 32:
        raise CorruptCache("truncated cache file")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCache("checksum mismatch")
    magic, h, level, kind, mode, fk, dim, nb, npts, nc, wl = _HEAD.unpack_from(body)
    if magic != MAGIC:
        raise CorruptCache("bad magic")
    off = _HEAD.size
    pts = np.frombuffer(body, "<f8", npts * nc, off).reshape(npts, nc).astype(np.float64)
    off += 8 * npts * nc
    words = None
    if wl:
        words = np.frombuffer(body, np.uint8, npts * wl, off).reshape(npts, wl).copy()
    kind_s = kind.rstrip(b"\0").decode()
    frame = GroupFrame(fk.rstrip(b"\0").decode(), dim, nb)
    return SpectrumCloud(level, kind_s, mode.rstrip(b"\0").decode(), frame, pts, words,
                         projection=projection, provenance={"cache": h.hex()})


def cache_put(cache_dir, content_hash, cloud):
    os.makedirs(cache_dir, exist_ok=True)
    path = cache_path(cache_dir, content_hash, cloud.level, cloud.kind, cloud.mode)
    blob = encode(cloud, content_hash)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)
    return path


def cache_get(cache_dir, content_hash, level, kind, mode, projection="native"):
    """Cached cloud or None; CorruptCache if the file fails its checksum."""
    path = cache_path(cache_dir, content_hash, level, kind, mode)
    if not os.path.exists(path):
        return None
    with open(path, "rb") as fh:
        return decode(fh.read(), projection)


def cached_cloud(cache_dir, content_hash, compute, level, kind, mode, projection="native"):
    """Cache lookup with transparent recompute on a miss or a corrupt file."""
    if cache_dir:
        try:
            hit = cache_get(cache_dir, content_hash, level, kind, mode, projection)
        except CorruptCache:
            hit = None
        if hit is not None:
            return hit, True
    cloud = compute()
    if cache_dir:
        cache_put(cache_dir, content_hash, cloud)
    return cloud, False
