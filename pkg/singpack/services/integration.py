import numpy as np


def rk4_step(fun, t, y, dt):
    """One classical Runge-Kutta 4 step; y may be a batch of states"""
    k1 = fun(t, y)
    k2 = fun(t + dt / 2, y + 0.5 * dt * k1)
    k3 = fun(t + dt / 2, y + 0.5 * dt * k2)
    k4 = fun(t + dt, y + dt * k3)
    return y + (1 / 6) * dt * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_trajectory(t_start, t_end, fun, n_points, init_cond):
    """
    Runge-Kutta 4 integration scheme on a uniform grid of n_points times
    """
    t = np.linspace(t_start, t_end, n_points)
    dt = t[1] - t[0]
    init_cond = np.asarray(init_cond, dtype=float)
    x = np.zeros((n_points,) + init_cond.shape)
    x[0] = init_cond
    for i in range(n_points - 1):
        x[i + 1] = rk4_step(fun, t[i], x[i], dt)
    return t, x
