"""Hypothesis strategies for types, plus an independent de Bruijn oracle."""

from __future__ import annotations

from hypothesis import strategies as st

from lazyf.types import INT, BOOL, Arrow, ExBar, Forall, Packed, TCon, TName, TVar

VARS = ("a", "b", "c", "t_vs", "s")


def _extend(children):
    binder = st.sampled_from(VARS)
    return st.one_of(
        st.builds(Arrow, children, children),
        st.builds(Forall, binder, children),
        st.builds(ExBar, binder, children),
        st.builds(lambda x, y: TCon("(,)", (x, y)), children, children),
        st.builds(lambda x: TCon("List", (x,)), children),
    )


leaves = st.one_of(
    st.sampled_from(VARS).map(TVar),
    st.sampled_from([INT, BOOL]),
    st.integers(0, 3).map(lambda i: TName(1000 + i, "n")),
)

types = st.recursive(leaves, _extend, max_leaves=12)


def exbar_types(binder: str = "t_vs"):
    """exbar types whose body is a chain of arrows, as elimination requires."""
    args = st.lists(types, min_size=0, max_size=4)
    return st.builds(lambda doms, res: ExBar(binder, _arrows(doms, res)), args, types)


def _arrows(doms, res):
    for d in reversed(doms):
        res = Arrow(d, res)
    return res


def de_bruijn(t, env=()):
    """Canonical nameless form; bound variables become their binder depth."""
    if isinstance(t, TVar):
        for i, name in enumerate(reversed(env)):
            if name == t.name:
                return ("bound", i)
        return ("free", t.name)
    if isinstance(t, TName):
        return ("name", t.ident)
    if isinstance(t, TCon):
        return ("con", t.name, tuple(de_bruijn(a, env) for a in t.args))
    if isinstance(t, Arrow):
        return ("->", de_bruijn(t.dom, env), de_bruijn(t.cod, env))
    if isinstance(t, Forall):
        return ("forall", de_bruijn(t.body, env + (t.binder,)))
    if isinstance(t, ExBar):
        return ("exbar", de_bruijn(t.body, env + (t.binder,)))
    if isinstance(t, Packed):
        return ("packed", de_bruijn(t.witness, env), de_bruijn(t.body, env + (t.binder,)))
    raise TypeError(t)


def rename_bound(t, suffix: str, env=None):
    """An alpha-variant of t: every binder gets ``suffix`` appended."""
    env = env or {}
    if isinstance(t, TVar):
        return TVar(env.get(t.name, t.name))
    if isinstance(t, TCon):
        return TCon(t.name, tuple(rename_bound(a, suffix, env) for a in t.args))
    if isinstance(t, Arrow):
        return Arrow(rename_bound(t.dom, suffix, env), rename_bound(t.cod, suffix, env))
    if isinstance(t, (Forall, ExBar)):
        new = t.binder + suffix
        return type(t)(new, rename_bound(t.body, suffix, {**env, t.binder: new}))
    if isinstance(t, Packed):
        new = t.binder + suffix
        return Packed(new, rename_bound(t.witness, suffix, env),
                      rename_bound(t.body, suffix, {**env, t.binder: new}))
    return t
