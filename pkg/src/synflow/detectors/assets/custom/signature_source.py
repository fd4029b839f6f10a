TARGET = {target!r}
ARITY = {arity!r}


def extract(root):
    found = []
    for target, value in assignments(root):
        value = strip(value)
        if value.type in CALLS and call_name(value) == TARGET:
            if ARITY is None or len(call_arguments(value)) == ARITY:
                found.append(target)
    return found
