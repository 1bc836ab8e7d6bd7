// Cameras: 2D pan/zoom and a fixed orthographic 3D orbit. Both expose
// the forward (world -> pixel) transform and its exact inverse so
// pointer input can be mapped back to world coordinates.

export interface PixelPoint {
  px: number;
  py: number;
}

export class Camera2D {
  // scale is pixels per world unit; (cx, cy) is the world point at the
  // canvas center. Canvas y grows downward, world y upward.
  constructor(
    public width: number,
    public height: number,
    public cx = 0,
    public cy = 5,
    public scale = 40,
  ) {}

  worldToPixel(x: number, y: number): PixelPoint {
    return {
      px: this.width / 2 + (x - this.cx) * this.scale,
      py: this.height / 2 - (y - this.cy) * this.scale,
    };
  }

  pixelToWorld(px: number, py: number): { x: number; y: number } {
    return {
      x: this.cx + (px - this.width / 2) / this.scale,
      y: this.cy - (py - this.height / 2) / this.scale,
    };
  }

  zoomBy(factor: number): void {
    this.scale *= factor;
  }

  panBy(dpx: number, dpy: number): void {
    this.cx -= dpx / this.scale;
    this.cy += dpy / this.scale;
  }
}

export class Camera3D {
  // Orbit about a target point with an orthographic projection: rotate
  // the world by yaw (about world y) then pitch (about view x), then
  // drop the depth axis.
  constructor(
    public width: number,
    public height: number,
    public target: [number, number, number] = [0, 5, 0],
    public yaw = 0.5,
    public pitch = 0.35,
    public scale = 40,
  ) {}

  /** Rotate into view space (x right, y up, z toward the viewer). */
  toView(p: [number, number, number]): [number, number, number] {
    const [tx, ty, tz] = this.target;
    const x = p[0] - tx;
    const y = p[1] - ty;
    const z = p[2] - tz;
    const cy = Math.cos(this.yaw);
    const sy = Math.sin(this.yaw);
    const x1 = cy * x + sy * z;
    const z1 = -sy * x + cy * z;
    const cp = Math.cos(this.pitch);
    const sp = Math.sin(this.pitch);
    const y2 = cp * y - sp * z1;
    const z2 = sp * y + cp * z1;
    return [x1, y2, z2];
  }

  worldToPixel(p: [number, number, number]): PixelPoint {
    const [vx, vy] = this.toView(p);
    return {
      px: this.width / 2 + vx * this.scale,
      py: this.height / 2 - vy * this.scale,
    };
  }

  /**
   * Inverse through the view plane (view depth 0 through the target):
   * the world point under the pointer on that plane. Exact inverse of
   * worldToPixel for points with view depth 0.
   */
  pixelToWorldOnViewPlane(px: number, py: number): [number, number, number] {
    const vx = (px - this.width / 2) / this.scale;
    const vy = -(py - this.height / 2) / this.scale;
    const vz = 0;
    // Undo pitch, then yaw.
    const cp = Math.cos(this.pitch);
    const sp = Math.sin(this.pitch);
    const y1 = cp * vy + sp * vz;
    const z1 = -sp * vy + cp * vz;
    const cy = Math.cos(this.yaw);
    const sy = Math.sin(this.yaw);
    const x2 = cy * vx - sy * z1;
    const z2 = sy * vx + cy * z1;
    const [tx, ty, tz] = this.target;
    return [x2 + tx, y1 + ty, z2 + tz];
  }

  zoomBy(factor: number): void {
    this.scale *= factor;
  }

  orbitBy(dyaw: number, dpitch: number): void {
    this.yaw += dyaw;
    this.pitch = Math.max(-1.4, Math.min(1.4, this.pitch + dpitch));
  }
}
