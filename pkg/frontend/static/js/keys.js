/** Keyboard-first labeling: digits assign classes, d discards, u reverts. */
export function keyToAction(key) {
    if (key >= "1" && key <= "5") {
        return { kind: "assign", classId: Number(key) };
    }
    switch (key) {
        case "d":
            return { kind: "discard" };
        case "u":
            return { kind: "unlabel" };
        case "n":
        case "ArrowRight":
            return { kind: "next" };
        case "p":
        case "ArrowLeft":
            return { kind: "previous" };
        case "Escape":
            return { kind: "close" };
        default:
            return null; // undefined keys are a no-op
    }
}
