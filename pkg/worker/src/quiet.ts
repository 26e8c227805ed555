// Imported first by main.ts: stdout is the protocol channel in stdio
// mode, so library chatter (tfjs backend notices and the like) must not
// land there.  Everything console-ish goes to stderr.
console.log = (...args: unknown[]) => console.error(...args);
console.info = (...args: unknown[]) => console.error(...args);

export {};
