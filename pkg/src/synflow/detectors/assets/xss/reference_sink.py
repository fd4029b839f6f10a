WRITE_CALLS = {"print", "println", "write", "format"}


def extract(root):
    found = []
    for n in root.walk():
        if n.type != "method_invocation" or call_name(n) not in WRITE_CALLS:
            continue
        receiver = n.child("object")
        if receiver is None or "getWriter" not in receiver.source():
            continue
        for arg in call_arguments(n):
            found.extend(direct_identifiers(arg))
    return found
