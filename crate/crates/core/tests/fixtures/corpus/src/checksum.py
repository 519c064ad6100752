import hashlib

def file_digest(path):
    # MD5 is only used for download checksums
    return hashlib.md5(open(path, "rb").read()).hexdigest()
