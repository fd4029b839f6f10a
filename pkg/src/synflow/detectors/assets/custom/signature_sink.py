TARGET = {target!r}
ARITY = {arity!r}


def extract(root):
    found = []
    for n in root.walk():
        if n.type in CALLS and call_name(n) == TARGET:
            args = call_arguments(n)
            if ARITY is None or len(args) == ARITY:
                for arg in args:
                    found.extend(direct_identifiers(arg))
    return found
