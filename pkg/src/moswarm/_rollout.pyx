# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled episode rollout.

Operation-for-operation port of ``moswarm._rollout_py`` (and through it of
``moswarm.sim`` and ``moswarm.controller``); results are bit-identical as
long as the C compiler does not contract multiply-adds.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, tanh, sqrt, fabs, INFINITY, M_PI

cnp.import_array()

cdef double CONTACT_EPS = 1e-3
cdef double MAX_ROTATION = M_PI / 4
cdef double MAX_VELOCITY = 2.0
TRACE_FIELDS = 11

cdef double[4] SENSOR_OFFSETS
SENSOR_OFFSETS[0] = 0.0
SENSOR_OFFSETS[1] = -M_PI / 2
SENSOR_OFFSETS[2] = M_PI
SENSOR_OFFSETS[3] = M_PI / 2


cdef inline double dmin(double a, double b) nogil:
    # matches Python's min(a, b): returns a unless b < a
    return b if b < a else a


cdef inline double clamp(double v, double lo, double hi) nogil:
    return lo if v < lo else (hi if v > hi else v)


cdef inline double ray_box(double px, double py, double c, double s, double half) nogil:
    cdef double t = INFINITY
    if c > 0.0:
        t = dmin(t, (half - px) / c)
    elif c < 0.0:
        t = dmin(t, (-half - px) / c)
    if s > 0.0:
        t = dmin(t, (half - py) / s)
    elif s < 0.0:
        t = dmin(t, (-half - py) / s)
    return t


cdef inline double ray_circle(double px, double py, double c, double s,
                              double cx, double cy, double rad) nogil:
    cdef double ox = cx - px
    cdef double oy = cy - py
    cdef double b = ox * c + oy * s
    cdef double cc = ox * ox + oy * oy - rad * rad
    cdef double disc
    if cc <= 0.0:
        return 0.0 if b > 0.0 else INFINITY
    if b <= 0.0:
        return INFINITY
    disc = b * b - cc
    if disc < 0.0:
        return INFINITY
    return b - sqrt(disc)


def rollout(params, layer_sizes, poses, double w1, double w2, double side, double radius,
            double max_range, double dt, int steps, bint record=False):
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef long[::1] sizes = np.ascontiguousarray(layer_sizes, dtype=np.int64)
    cdef double[:, ::1] pose = np.ascontiguousarray(poses, dtype=np.float64)
    cdef Py_ssize_t n = pose.shape[0]
    cdef Py_ssize_t nlayers = sizes.shape[0]
    cdef Py_ssize_t widest = 0
    cdef Py_ssize_t i, j, k, t, l, fan_in, fan_out, pos, q

    expected = sum(int(a) * int(b) + int(b) for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))
    if p.shape[0] != expected:
        raise ValueError(f"genome has {p.shape[0]} parameters, layers need {expected}")
    if sizes[0] != 6 or sizes[nlayers - 1] != 2:
        raise ValueError("controller needs 6 inputs and 2 outputs")
    for l in range(nlayers):
        if sizes[l] > widest:
            widest = sizes[l]

    cdef double[::1] x = np.array(pose[:, 0])
    cdef double[::1] y = np.array(pose[:, 1])
    cdef double[::1] h = np.array(pose[:, 2])
    cdef double[::1] dx = np.zeros(n)
    cdef double[::1] dy = np.zeros(n)
    cdef double[:, ::1] sens = np.zeros((n, 4))
    cdef double[::1] rot = np.zeros(n)
    cdef double[::1] vel = np.zeros(n)
    cdef double[::1] buf_a = np.zeros(widest)
    cdef double[::1] buf_b = np.zeros(widest)
    cdef double[::1] cur, nxt, tmp

    obj1_arr = np.zeros(steps)
    obj2_arr = np.zeros(steps)
    cdef double[::1] obj1 = obj1_arr
    cdef double[::1] obj2 = obj2_arr
    trace_arr = np.zeros((steps, n, TRACE_FIELDS)) if record else None
    cdef double[:, :, ::1] tr
    if record:
        tr = trace_arr

    cdef double half = side / 2.0
    cdef double lim = side / 2.0 - radius
    cdef double hit = 2.0 * radius
    cdef double sep2 = (2.0 * radius) * (2.0 * radius)
    cdef double ang, c, s, dist, raw, acc, heading, want, room, travel, ddx, ddy, nx, ny
    cdef double ox, oy, o1, o2
    cdef bint ok

    for t in range(steps):
        # sense against the pre-step snapshot
        for i in range(n):
            for k in range(4):
                ang = h[i] + SENSOR_OFFSETS[k]
                c = cos(ang)
                s = sin(ang)
                dist = ray_box(x[i], y[i], c, s, half)
                for j in range(n):
                    if j != i:
                        dist = dmin(dist, ray_circle(x[i], y[i], c, s, x[j], y[j], radius))
                raw = dist - radius
                if raw < 0.0:
                    raw = 0.0
                if raw > max_range:
                    raw = max_range
                sens[i, k] = raw / max_range

        # controller
        for i in range(n):
            cur = buf_a
            nxt = buf_b
            for k in range(4):
                cur[k] = sens[i, k]
            cur[4] = w1
            cur[5] = w2
            pos = 0
            for l in range(nlayers - 1):
                fan_in = sizes[l]
                fan_out = sizes[l + 1]
                for q in range(fan_out):
                    acc = p[pos + fan_in * fan_out + q]
                    for k in range(fan_in):
                        acc = acc + p[pos + q * fan_in + k] * cur[k]
                    nxt[q] = tanh(acc)
                pos += fan_in * fan_out + fan_out
                tmp = cur
                cur = nxt
                nxt = tmp
            rot[i] = clamp(cur[0] * MAX_ROTATION, -MAX_ROTATION, MAX_ROTATION)
            vel[i] = clamp((cur[1] + 1.0) * 0.5 * MAX_VELOCITY, 0.0, MAX_VELOCITY)

        # act sequentially in index order
        for i in range(n):
            heading = h[i] + rot[i]
            if heading >= M_PI:
                heading -= 2.0 * M_PI
            elif heading < -M_PI:
                heading += 2.0 * M_PI
            h[i] = heading
            c = cos(heading)
            s = sin(heading)
            want = vel[i] * dt
            dist = ray_box(x[i], y[i], c, s, lim)
            for j in range(n):
                if j != i:
                    dist = dmin(dist, ray_circle(x[i], y[i], c, s, x[j], y[j], hit))
            room = dist - CONTACT_EPS
            if want <= room:
                travel = want
            elif room > 0.0:
                travel = room
            else:
                travel = 0.0
            ddx = travel * c
            ddy = travel * s
            nx = x[i] + ddx
            ny = y[i] + ddy
            if travel > 0.0:
                ok = not (nx > lim or nx < -lim or ny > lim or ny < -lim)
                if ok:
                    for j in range(n):
                        if j != i:
                            ox = nx - x[j]
                            oy = ny - y[j]
                            if ox * ox + oy * oy < sep2:
                                ok = False
                                break
                if not ok:
                    ddx = 0.0
                    ddy = 0.0
                    nx = x[i]
                    ny = y[i]
            x[i] = nx
            y[i] = ny
            dx[i] = ddx
            dy[i] = ddy

        o1 = 0.0
        o2 = 0.0
        for i in range(n):
            o1 += fabs(x[i]) + fabs(y[i])
            o2 += (fabs(dx[i]) + fabs(dy[i])) / dt
        obj1[t] = o1
        obj2[t] = o2

        if record:
            for i in range(n):
                tr[t, i, 0] = x[i]
                tr[t, i, 1] = y[i]
                tr[t, i, 2] = h[i]
                tr[t, i, 3] = dx[i]
                tr[t, i, 4] = dy[i]
                for k in range(4):
                    tr[t, i, 5 + k] = sens[i, k]
                tr[t, i, 9] = rot[i]
                tr[t, i, 10] = vel[i]

    return obj1_arr, obj2_arr, trace_arr
