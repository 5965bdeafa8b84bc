import { ApiClient, ApiError } from "./api.js";
import { AnnotationSession } from "./session.js";
import { LayoutInfo, SeedEntry } from "./types.js";
import { drawAnnotation, fitView, hitTest, toImage, View2D } from "./render2d.js";
import { Camera, drawSkeleton3D } from "./render3d.js";

const $ = (id: string) => document.getElementById(id)!;

// Starting scatter for a fresh image: walk the kinematic tree outward with
// bone-length-scaled offsets. Just a draggable starting point, nothing more.
function defaultKeypoints(layout: LayoutInfo, scale = 220): number[][] {
  const pts: number[][] = [[512, 512]];
  const golden = Math.PI * (3 - Math.sqrt(5));
  for (let j = 1; j < layout.joint_names.length; j++) {
    const p = layout.kinematic_parent[j];
    const len = layout.bone_lengths[j - 1] * scale;
    const ang = j * golden;
    pts.push([pts[p][0] + len * Math.cos(ang), pts[p][1] + len * Math.sin(ang)]);
  }
  return pts;
}

async function boot() {
  const api = new ApiClient("");
  const layouts = await api.layouts();

  const layoutSel = $("layout") as HTMLSelectElement;
  for (const lay of layouts) {
    const opt = document.createElement("option");
    opt.value = lay.layout_id;
    opt.textContent = `${lay.layout_id} (${lay.joint_names.length} joints)`;
    layoutSel.appendChild(opt);
  }

  const canvas2d = $("view2d") as HTMLCanvasElement;
  const canvas3d = $("view3d") as HTMLCanvasElement;
  const ctx2d = canvas2d.getContext("2d")!;
  const ctx3d = canvas3d.getContext("2d")!;
  const status = $("status");
  const exportBtn = $("export") as HTMLButtonElement;
  const saveBtn = $("save") as HTMLButtonElement;

  let session: AnnotationSession;
  let view: View2D;
  let cam: Camera = { yaw: 0.6, pitch: 0.25 };
  let image: HTMLImageElement | null = null;
  let selected = -1;

  function layoutById(id: string) {
    return layouts.find((l) => l.layout_id === id)!;
  }

  function redraw() {
    const ack = session.displayed;
    const flags = ack && !session.dirty ? ack.result.clamp_flags : null;
    drawAnnotation(ctx2d, session.layout, session.keypoints, session.signs,
      flags, view, canvas2d.width, canvas2d.height, image, selected);
    if (ack) {
      drawSkeleton3D(ctx3d, ack.result.joints_3d, session.layout.kinematic_parent,
        ack.result.clamp_flags, cam, canvas3d.width, canvas3d.height);
    } else {
      ctx3d.clearRect(0, 0, canvas3d.width, canvas3d.height);
    }

    const bits: string[] = [];
    if (ack) {
      bits.push(`λ = ${ack.result.lambda_prop.toFixed(2)} px/unit`);
      const clamped = ack.result.clamp_flags.filter(Boolean).length;
      if (clamped) bits.push(`${clamped} clamped bone${clamped > 1 ? "s" : ""}`);
    }
    if (session.inFlight) bits.push("lifting…");
    else if (session.dirty) bits.push("edited — drop/drag again or toggle to re-lift");
    if (session.lastError) bits.push(`error: ${session.lastError.message}`);
    status.textContent = bits.join("  ·  ") || "ready";
    status.className = session.lastError ? "err" : "";
    exportBtn.disabled = !session.canExport;
    saveBtn.disabled = !session.canExport;
  }

  function startSession(layout: LayoutInfo, pts: number[][], imageRef = "") {
    session = new AnnotationSession(api, layout, pts, imageRef);
    session.onUpdate = redraw;
    view = fitView(session.keypoints, canvas2d.width, canvas2d.height);
    selected = -1;
    void session.relift();
  }

  startSession(layoutById(layoutSel.value || layouts[0].layout_id),
    defaultKeypoints(layouts[0]));

  layoutSel.onchange = () => {
    const lay = layoutById(layoutSel.value);
    startSession(lay, defaultKeypoints(lay));
  };

  // --- 2D canvas: drag keypoints, click to toggle a sign ---
  let dragging = -1;
  let dragMoved = false;
  canvas2d.onmousedown = (ev) => {
    const r = canvas2d.getBoundingClientRect();
    dragging = hitTest(view, session.keypoints, ev.clientX - r.left, ev.clientY - r.top);
    dragMoved = false;
    selected = dragging;
    redraw();
  };
  canvas2d.onmousemove = (ev) => {
    if (dragging < 0) return;
    const r = canvas2d.getBoundingClientRect();
    const [x, y] = toImage(view, ev.clientX - r.left, ev.clientY - r.top);
    session.moveKeypoint(dragging, x, y);
    dragMoved = true;
  };
  canvas2d.onmouseup = () => {
    if (dragging < 0) return;
    if (dragMoved) void session.relift(); // one lift per drag gesture
    else if (dragging > 0) void session.toggleSign(dragging);
    dragging = -1;
  };
  canvas2d.onmouseleave = () => {
    if (dragging >= 0 && dragMoved) void session.relift();
    dragging = -1;
  };

  // --- 3D canvas: orbit ---
  let orbiting = false;
  let last = [0, 0];
  canvas3d.onmousedown = (ev) => { orbiting = true; last = [ev.clientX, ev.clientY]; };
  window.addEventListener("mouseup", () => { orbiting = false; });
  canvas3d.onmousemove = (ev) => {
    if (!orbiting) return;
    cam = {
      yaw: cam.yaw + (ev.clientX - last[0]) * 0.01,
      pitch: Math.max(-1.5, Math.min(1.5, cam.pitch + (ev.clientY - last[1]) * 0.01)),
    };
    last = [ev.clientX, ev.clientY];
    redraw();
  };

  // --- image underlay ---
  ($("imageurl") as HTMLInputElement).onchange = (ev) => {
    const url = (ev.target as HTMLInputElement).value.trim();
    if (!url) { image = null; redraw(); return; }
    const img = new Image();
    img.onload = () => { image = img; session.imageRef = url; redraw(); };
    img.onerror = () => { status.textContent = `could not load ${url}`; };
    img.src = url;
  };

  // --- seed file load / export / save ---
  ($("loadseed") as HTMLInputElement).onchange = async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    try {
      const entries = JSON.parse(await file.text()) as SeedEntry[];
      const entry = entries[0];
      const lay = layoutById(entry.layout_id || layoutSel.value);
      layoutSel.value = lay.layout_id;
      startSession(lay, entry.keypoints_px, entry.image_ref);
      await session.loadEntry(entry);
      view = fitView(session.keypoints, canvas2d.width, canvas2d.height);
      redraw();
    } catch (err) {
      status.textContent = `bad seed file: ${err}`;
      status.className = "err";
    }
  };

  exportBtn.onclick = () => {
    const blob = new Blob([session.exportSeed()], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "seed.json";
    a.click();
    URL.revokeObjectURL(a.href);
  };

  saveBtn.onclick = async () => {
    try {
      const { id } = await api.saveSeed(session.exportSeed());
      status.textContent = `saved as ${id}`;
    } catch (err) {
      status.textContent = err instanceof ApiError ? err.message : String(err);
      status.className = "err";
    }
  };
}

boot().catch((err) => {
  $("status").textContent = `failed to start: ${err}`;
  $("status").className = "err";
});
